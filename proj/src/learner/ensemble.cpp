#include <xcfuzz/learner/ensemble.hpp>

#include <xcfuzz/learner/rng.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <tuple>

namespace xcfuzz::learner
{
    namespace
    {
        // Error floor for a perfect weak learner; bounds its alpha.
        constexpr double min_error = 1e-10;

        void check_dims(std::span<double const> fv)
        {
            if (fv.size() != feature_dims) {
                throw std::invalid_argument(fmt::format(
                    "feature vector has {} components, expected {}", fv.size(), feature_dims));
            }
        }
    }

    std::string_view to_string(ModelKind k)
    {
        return k == ModelKind::EEC ? "eec" : "decision-tree";
    }

    ModelKind model_kind_from_string(std::string_view text)
    {
        if (text == "eec") {
            return ModelKind::EEC;
        }
        if (text == "decision-tree") {
            return ModelKind::DecisionTree;
        }
        throw std::invalid_argument(fmt::format("unknown model kind '{}'", text));
    }

    double Committee::score(std::span<double const> x) const
    {
        double yes = 0.0;
        double total = 0.0;
        for (std::size_t t = 0; t < trees.size(); ++t) {
            total += alphas[t];
            if (trees[t].predict(x)) {
                yes += alphas[t];
            }
        }
        return total > 0.0 ? yes / total : 0.5;
    }

    double EnsembleModel::score(std::span<double const> fv) const
    {
        check_dims(fv);
        if (kind == ModelKind::DecisionTree) {
            return tree.score(fv);
        }
        if (bags.empty()) {
            throw std::logic_error("ensemble has no bags");
        }
        double sum = 0.0;
        for (auto const &b : bags) {
            sum += b.score(fv);
        }
        return sum / static_cast<double>(bags.size());
    }

    Prediction predict(EnsembleModel const &model, std::span<double const> fv)
    {
        auto const s = model.score(fv);
        return {s, s >= model.params.threshold};
    }

    Prediction predict(EnsembleModel const &model, FunctionSample const &sample)
    {
        return predict(model, build_feature_vector(sample.tokens, model.embedding, sample.features));
    }

    TrainingSet deduplicate(TrainingSet const &data)
    {
        TrainingSet out;
        std::set<std::pair<FeatureVector, std::uint8_t>> seen;
        for (std::size_t i = 0; i < data.x.size(); ++i) {
            if (seen.emplace(data.x[i], data.y[i]).second) {
                out.x.push_back(data.x[i]);
                out.y.push_back(data.y[i]);
            }
        }
        return out;
    }

    Committee fit_adaboost(std::span<FeatureVector const> x, Labels const &y, std::size_t rounds,
                           std::size_t depth)
    {
        Committee c;
        auto const n = x.size();
        std::vector<double> w(n, 1.0 / static_cast<double>(n));
        TreeParams const tp{depth, 2};
        for (std::size_t round = 0; round < rounds; ++round) {
            auto tree = fit_tree(x, y, w, tp);
            std::vector<bool> miss(n);
            double err = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                miss[i] = tree.predict(x[i]) != (y[i] != 0);
                err += miss[i] ? w[i] : 0.0;
            }
            if (err >= 0.5) {
                // No better than chance; keep a first learner so the
                // committee is never empty.
                if (c.trees.empty()) {
                    c.trees.push_back(std::move(tree));
                    c.alphas.push_back(1.0);
                }
                break;
            }
            auto const e = std::max(err, min_error);
            auto const alpha = std::log((1.0 - e) / e);
            c.trees.push_back(std::move(tree));
            c.alphas.push_back(alpha);
            if (err <= min_error) {
                break;
            }
            double norm = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (miss[i]) {
                    w[i] *= std::exp(alpha);
                }
                norm += w[i];
            }
            for (auto &wi : w) {
                wi /= norm;
            }
        }
        return c;
    }

    EnsembleModel train_classifier(TrainingSet const &data, ModelKind kind, std::uint64_t seed,
                                   EnsembleParams const &params)
    {
        if (data.x.size() != data.y.size()) {
            throw std::invalid_argument("feature and label counts differ");
        }
        std::vector<std::size_t> pos;
        std::vector<std::size_t> neg;
        for (std::size_t i = 0; i < data.x.size(); ++i) {
            check_dims(data.x[i]);
            (data.y[i] ? pos : neg).push_back(i);
        }
        if (pos.empty() || neg.empty()) {
            throw std::invalid_argument("training data must contain both classes");
        }

        EnsembleModel model;
        model.kind = kind;
        model.params = params;
        model.seed = seed;
        if (kind == ModelKind::DecisionTree) {
            std::vector<double> w(data.x.size(), 1.0);
            model.tree = fit_tree(data.x, data.y, w, {params.tree_depth, 2});
            return model;
        }
        if (params.bags == 0) {
            throw std::invalid_argument("an EEC model needs at least one bag");
        }
        auto const &minority = pos.size() <= neg.size() ? pos : neg;
        auto const &majority = pos.size() <= neg.size() ? neg : pos;
        for (std::size_t b = 0; b < params.bags; ++b) {
            Rng rng(derive_seed(seed, b));
            // Partial Fisher-Yates: the first |minority| entries form a
            // uniform sample without replacement.
            auto pool = majority;
            for (std::size_t i = 0; i < minority.size(); ++i) {
                std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
            }
            std::vector<FeatureVector> bx;
            Labels by;
            for (auto i : minority) {
                bx.push_back(data.x[i]);
                by.push_back(data.y[i]);
            }
            for (std::size_t i = 0; i < minority.size(); ++i) {
                bx.push_back(data.x[pool[i]]);
                by.push_back(data.y[pool[i]]);
            }
            auto committee = fit_adaboost(bx, by, params.rounds, params.bag_depth);
            committee.positives = minority.size();
            committee.negatives = minority.size();
            model.bags.push_back(std::move(committee));
        }
        return model;
    }

    EnsembleModel train_category_model(std::span<FunctionSample const> samples,
                                       std::span<LabelRecord const> labels,
                                       oracles::VulnCategory category, std::uint64_t seed,
                                       ModelKind kind, EnsembleParams const &params)
    {
        std::vector<TokenSequence> corpus;
        for (auto const &s : samples) {
            corpus.push_back(s.tokens);
        }
        auto emb = train_embedding(corpus, derive_seed(seed, 0xE4BE));

        std::map<std::pair<std::string, std::string>, bool> positive;
        for (auto const &r : labels) {
            if (r.category == category) {
                positive[{r.contract, r.function}] = r.label;
            }
        }
        TrainingSet data;
        for (auto const &s : samples) {
            data.x.push_back(build_feature_vector(s.tokens, emb, s.features));
            auto const it = positive.find({s.contract, s.function});
            data.y.push_back(it != positive.end() && it->second ? 1 : 0);
        }
        auto model = train_classifier(deduplicate(data), kind, seed, params);
        model.category = category;
        model.embedding = std::move(emb);
        return model;
    }
}
