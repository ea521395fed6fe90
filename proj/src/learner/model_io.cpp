#include <xcfuzz/learner/model_io.hpp>

#include <fmt/format.h>
#include <json.hpp>

namespace xcfuzz::learner
{
    using nlohmann::json;

    namespace
    {
        json node_to_json(DecisionTree const &t, std::int32_t id)
        {
            auto const &n = t.nodes.at(static_cast<std::size_t>(id));
            json j;
            j["value"] = n.value;
            if (!n.leaf()) {
                j["feature"] = n.feature;
                j["threshold"] = n.threshold;
                j["left"] = node_to_json(t, n.left);
                j["right"] = node_to_json(t, n.right);
            }
            return j;
        }

        json tree_to_json(DecisionTree const &t)
        {
            json j;
            j["tiePositive"] = t.tie_positive;
            j["root"] = node_to_json(t, 0);
            return j;
        }

        // Appends in pre-order, matching the order fit_tree creates nodes.
        std::int32_t node_from_json(json const &j, DecisionTree &t)
        {
            auto const id = static_cast<std::int32_t>(t.nodes.size());
            TreeNode n;
            n.value = j.at("value").get<double>();
            t.nodes.push_back(n);
            if (j.contains("feature")) {
                auto const feature = j.at("feature").get<std::int32_t>();
                if (feature < 0) {
                    throw ModelError("negative split feature");
                }
                auto const threshold = j.at("threshold").get<double>();
                auto const l = node_from_json(j.at("left"), t);
                auto const r = node_from_json(j.at("right"), t);
                auto &slot = t.nodes[static_cast<std::size_t>(id)];
                slot.feature = feature;
                slot.threshold = threshold;
                slot.left = l;
                slot.right = r;
            }
            return id;
        }

        DecisionTree tree_from_json(json const &j)
        {
            DecisionTree t;
            t.tie_positive = j.at("tiePositive").get<bool>();
            node_from_json(j.at("root"), t);
            return t;
        }
    }

    std::string serialize_model(EnsembleModel const &model)
    {
        json j;
        j["schema"] = model_schema;
        j["kind"] = std::string(to_string(model.kind));
        j["category"] = std::string(oracles::to_string(model.category));
        j["seed"] = model.seed;
        j["threshold"] = model.params.threshold;
        auto const &ep = model.embedding.params;
        j["hyperparams"] = {
            {"bags", model.params.bags},
            {"rounds", model.params.rounds},
            {"bagDepth", model.params.bag_depth},
            {"treeDepth", model.params.tree_depth},
            {"embedding",
             {{"dims", embedding_dims},
              {"window", ep.window},
              {"negatives", ep.negatives},
              {"epochs", ep.epochs},
              {"learningRate", ep.learning_rate},
              {"seed", model.embedding.seed}}},
        };
        json emb = json::object();
        for (auto const &[token, vec] : model.embedding.vectors) {
            emb[token] = vec;
        }
        j["embedding"] = emb;
        json bags = json::array();
        for (auto const &b : model.bags) {
            json jb;
            jb["positives"] = b.positives;
            jb["negatives"] = b.negatives;
            jb["alphas"] = b.alphas;
            json trees = json::array();
            for (auto const &t : b.trees) {
                trees.push_back(tree_to_json(t));
            }
            jb["trees"] = trees;
            bags.push_back(jb);
        }
        j["bags"] = bags;
        j["tree"] = model.tree.nodes.empty() ? json(nullptr) : tree_to_json(model.tree);
        return j.dump(1) + "\n";
    }

    EnsembleModel parse_model(std::string const &text)
    {
        try {
            auto const j = json::parse(text);
            if (j.at("schema").get<std::string>() != model_schema) {
                throw ModelError(fmt::format("model schema must be \"{}\"", model_schema));
            }
            EnsembleModel m;
            m.kind = model_kind_from_string(j.at("kind").get<std::string>());
            m.category = oracles::category_from_string(j.at("category").get<std::string>());
            m.seed = j.at("seed").get<std::uint64_t>();
            m.params.threshold = j.at("threshold").get<double>();
            auto const &h = j.at("hyperparams");
            m.params.bags = h.at("bags").get<std::size_t>();
            m.params.rounds = h.at("rounds").get<std::size_t>();
            m.params.bag_depth = h.at("bagDepth").get<std::size_t>();
            m.params.tree_depth = h.at("treeDepth").get<std::size_t>();
            auto const &he = h.at("embedding");
            if (he.at("dims").get<std::size_t>() != embedding_dims) {
                throw ModelError("embedding dimension mismatch");
            }
            m.embedding.params.window = he.at("window").get<std::size_t>();
            m.embedding.params.negatives = he.at("negatives").get<std::size_t>();
            m.embedding.params.epochs = he.at("epochs").get<std::size_t>();
            m.embedding.params.learning_rate = he.at("learningRate").get<double>();
            m.embedding.seed = he.at("seed").get<std::uint64_t>();
            for (auto const &[token, vec] : j.at("embedding").items()) {
                auto const values = vec.get<std::vector<double>>();
                if (values.size() != embedding_dims) {
                    throw ModelError(fmt::format("token '{}' has {} components", token,
                                                 values.size()));
                }
                TokenVector tv;
                std::copy(values.begin(), values.end(), tv.begin());
                m.embedding.vectors.emplace(token, tv);
            }
            for (auto const &jb : j.at("bags")) {
                Committee c;
                c.positives = jb.at("positives").get<std::size_t>();
                c.negatives = jb.at("negatives").get<std::size_t>();
                c.alphas = jb.at("alphas").get<std::vector<double>>();
                for (auto const &jt : jb.at("trees")) {
                    c.trees.push_back(tree_from_json(jt));
                }
                if (c.trees.size() != c.alphas.size()) {
                    throw ModelError("bag tree and alpha counts differ");
                }
                m.bags.push_back(std::move(c));
            }
            if (!j.at("tree").is_null()) {
                m.tree = tree_from_json(j.at("tree"));
            }
            if (m.kind == ModelKind::EEC && m.bags.empty()) {
                throw ModelError("EEC model without bags");
            }
            if (m.kind == ModelKind::DecisionTree && m.tree.nodes.empty()) {
                throw ModelError("decision-tree model without a tree");
            }
            return m;
        }
        catch (ModelError const &) {
            throw;
        }
        catch (std::exception const &e) {
            throw ModelError(fmt::format("invalid model document: {}", e.what()));
        }
    }
}
