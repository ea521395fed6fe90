#include <doctest.h>

#include "support/fixtures.hpp"
#include "support/programs.hpp"
#include "support/separable.hpp"

#include <xcfuzz/analysis/callgraph.hpp>
#include <xcfuzz/analysis/features.hpp>
#include <xcfuzz/learner/embedding.hpp>
#include <xcfuzz/learner/ensemble.hpp>
#include <xcfuzz/learner/feature_vector.hpp>
#include <xcfuzz/learner/labels.hpp>
#include <xcfuzz/learner/metrics.hpp>
#include <xcfuzz/learner/model_io.hpp>
#include <xcfuzz/learner/rng.hpp>
#include <xcfuzz/learner/tokens.hpp>
#include <xcfuzz/learner/voters.hpp>

#include <algorithm>
#include <cmath>
#include <set>

using namespace xcfuzz;
using namespace xcfuzz::learner;
using oracles::VulnCategory;
using testing::separable;

namespace
{
    TokenSequence seq(std::initializer_list<char const *> tokens)
    {
        return TokenSequence(tokens.begin(), tokens.end());
    }

    std::vector<TokenSequence> small_corpus()
    {
        return {seq({"PUSH", "PUSH", "ADD", "POP", "STOP"}),
                seq({"JUMPDEST", "CALLER", "SLOAD", "PUSH", "CALLER", "PUSH", "CALL", "POP",
                     "PUSH", "CALLER", "SSTORE", "STOP"}),
                seq({"JUMPDEST", "ORIGIN", "PUSH", "SLOAD", "EQ", "PUSH", "JUMPI", "REVERT"})};
    }

    std::vector<double> scores_of(EnsembleModel const &m, TrainingSet const &data)
    {
        std::vector<double> out;
        for (auto const &x : data.x) {
            out.push_back(m.score(x));
        }
        return out;
    }
}

TEST_CASE("token vocabulary collapses operand-width variants")
{
    CHECK(token_of(vm::Opcode::PUSH1) == "PUSH");
    CHECK(token_of(vm::Opcode::PUSH8) == "PUSH");
    CHECK(token_of(vm::Opcode::DUP3) == "DUP");
    CHECK(token_of(vm::Opcode::SWAP2) == "SWAP");
    auto const &vocab = vocabulary();
    CHECK(vocab.size() <= 40);
    CHECK(std::is_sorted(vocab.begin(), vocab.end()));

    auto const pkgs = testing::load_fixture("bank");
    auto const &bank = testing::package_named(pkgs, "Bank");
    auto const tokens = tokenize(bank, testing::function_named(bank, "deposit"));
    CHECK(tokens == seq({"JUMPDEST", "CALLVALUE", "CALLER", "SLOAD", "ADD", "CALLER", "SSTORE",
                         "STOP"}));
    for (auto const &t : tokens) {
        CHECK(std::binary_search(vocab.begin(), vocab.end(), t));
    }
}

TEST_CASE("embedding has 20 components per token and is seed-deterministic")
{
    auto const corpus = small_corpus();
    auto const a = train_embedding(corpus, 42);
    auto const b = train_embedding(corpus, 42);
    auto const c = train_embedding(corpus, 43);
    CHECK(a == b);
    CHECK_FALSE(a == c);
    std::set<std::string> tokens;
    for (auto const &s : corpus) {
        tokens.insert(s.begin(), s.end());
    }
    CHECK(a.vectors.size() == tokens.size());
    for (auto const &[t, v] : a.vectors) {
        CHECK(v.size() == 20);
        CHECK(tokens.contains(t));
        for (auto x : v) {
            CHECK(std::isfinite(x));
        }
    }
    auto const &unknown = a.lookup("NOT_A_TOKEN");
    CHECK(std::all_of(unknown.begin(), unknown.end(), [](double x) { return x == 0.0; }));
}

TEST_CASE("embedding of a single repeated token stays finite")
{
    std::vector<TokenSequence> corpus{TokenSequence(500, "PUSH"), TokenSequence(3, "PUSH")};
    auto const emb = train_embedding(corpus, 7, {5, 5, 50, 0.5});
    REQUIRE(emb.vectors.size() == 1);
    for (auto x : emb.vectors.at("PUSH")) {
        CHECK(std::isfinite(x));
        CHECK(std::abs(x) < 1e6);
    }
}

TEST_CASE("embedding rejects a corpus without tokens")
{
    std::vector<TokenSequence> none;
    CHECK_THROWS_AS(train_embedding(none, 1), std::invalid_argument);
    std::vector<TokenSequence> empties{{}, {}};
    CHECK_THROWS_AS(train_embedding(empties, 1), std::invalid_argument);
}

TEST_CASE("feature vector layout")
{
    auto const emb = train_embedding(small_corpus(), 3);
    analysis::StaticFeatures none;
    auto const zero = build_feature_vector({}, emb, none);
    CHECK(zero == FeatureVector(27, 0.0));

    analysis::StaticFeatures sf;
    sf.has_call = true;
    sf.callee_external = true;
    auto const one = build_feature_vector(seq({"SLOAD"}), emb, sf);
    REQUIRE(one.size() == 27);
    auto const &v = emb.lookup("SLOAD");
    for (std::size_t i = 0; i < 20; ++i) {
        CHECK(one[i] == v[i]);
    }
    CHECK(std::vector<double>(one.begin() + 20, one.end()) ==
          std::vector<double>{0, 1, 0, 0, 0, 0, 1});

    // Mean pooling is order-insensitive.
    auto const ab = build_feature_vector(seq({"ADD", "CALL", "ADD"}), emb, none);
    auto const ba = build_feature_vector(seq({"CALL", "ADD", "ADD"}), emb, none);
    for (std::size_t i = 0; i < 20; ++i) {
        CHECK(ab[i] == doctest::Approx(ba[i]));
        double const mean =
            (2 * emb.lookup("ADD")[i] + emb.lookup("CALL")[i]) / 3.0;
        CHECK(ab[i] == doctest::Approx(mean));
    }
}

TEST_CASE("feature vectors over random functions have 27 components with binary tail")
{
    testing::TestRng rng(0xFEA7);
    std::size_t functions = 0;
    for (int round = 0; round < 40; ++round) {
        testing::RandomWorldOptions opts;
        opts.tainted = round % 2 == 1;
        auto const pkgs = testing::random_contracts(rng, opts);
        auto const samples = extract_samples(pkgs);
        std::vector<TokenSequence> corpus;
        for (auto const &s : samples) {
            corpus.push_back(s.tokens);
        }
        auto const emb = train_embedding(corpus, static_cast<std::uint64_t>(round));
        for (auto const &s : samples) {
            auto const fv = build_feature_vector(s.tokens, emb, s.features);
            REQUIRE(fv.size() == 27);
            auto const flags = s.features.as_array();
            for (std::size_t i = 0; i < 7; ++i) {
                CHECK(fv[20 + i] == (flags[i] ? 1.0 : 0.0));
            }
            ++functions;
        }
    }
    CHECK(functions >= 100);
}

TEST_CASE("voters on the reentrancy fixture all report reentrancy")
{
    auto const pkgs = testing::load_fixture("bank");
    auto const &bank = testing::package_named(pkgs, "Bank");
    auto const votes = run_voters(bank, testing::function_named(bank, "withdrawBalance"));
    for (auto v : all_voters) {
        CHECK(votes.at(v).at(VulnCategory::Reentrancy));
        CHECK_FALSE(votes.at(v).at(VulnCategory::Delegatecall));
        CHECK_FALSE(votes.at(v).at(VulnCategory::TxOrigin));
    }
}

TEST_CASE("voters on a pure arithmetic function all report nothing")
{
    auto const pkg = testing::make_package(
        "Arith", 0xA, "f: JUMPDEST / PUSH 2 / PUSH 3 / ADD / PUSH 4 / MUL / POP / STOP",
        {{"f", 0x1, "f"}});
    auto const votes = run_voters(pkg, pkg.functions.front());
    for (auto v : all_voters) {
        for (auto c : oracles::all_categories) {
            CHECK_FALSE(votes.at(v).at(c));
        }
    }
}

TEST_CASE("ORIGIN in dead code is seen only by the syntactic voter")
{
    auto const pkg = testing::make_package(
        "Dead", 0xA,
        "f: JUMPDEST / STOP / ORIGIN / PUSH 1 / EQ / POP / "
        "PUSH 0 / PUSH 0 / PUSH 0 / PUSH 0 / PUSH 5 / PUSH 0xa77a / PUSH 0 / CALL / STOP",
        {{"f", 0x1, "f"}});
    auto const votes = run_voters(pkg, pkg.functions.front());
    CHECK(votes.at(VoterId::Syntactic).at(VulnCategory::TxOrigin));
    CHECK_FALSE(votes.at(VoterId::Strict).at(VulnCategory::TxOrigin));
    CHECK_FALSE(votes.at(VoterId::Taint).at(VulnCategory::TxOrigin));
    for (auto v : all_voters) {
        CHECK_FALSE(votes.at(v).at(VulnCategory::Reentrancy));
    }
}

TEST_CASE("voters on the delegation and tx-origin fixtures")
{
    auto const del = testing::load_fixture("delegation");
    auto const &d = testing::package_named(del, "Delegation");
    auto const dv = run_voters(d, testing::function_named(d, "fallback"));
    CHECK_FALSE(dv.at(VoterId::Strict).at(VulnCategory::Delegatecall));
    CHECK(dv.at(VoterId::Taint).at(VulnCategory::Delegatecall));
    CHECK(dv.at(VoterId::Syntactic).at(VulnCategory::Delegatecall));

    auto const tx = testing::load_fixture("txorigin");
    auto const &t = testing::package_named(tx, "TxOrigin");
    auto const tv = run_voters(t, testing::function_named(t, "transferTo"));
    CHECK(tv.at(VoterId::Strict).at(VulnCategory::TxOrigin));
    CHECK(tv.at(VoterId::Syntactic).at(VulnCategory::TxOrigin));
    auto const checked = run_voters(t, testing::function_named(t, "transferToChecked"));
    for (auto v : all_voters) {
        CHECK_FALSE(checked.at(v).at(VulnCategory::TxOrigin));
    }
    auto const ping = run_voters(t, testing::function_named(t, "ping"));
    CHECK_FALSE(ping.at(VoterId::Strict).at(VulnCategory::TxOrigin));
    CHECK(ping.at(VoterId::Syntactic).at(VulnCategory::TxOrigin));
}

TEST_CASE("majority label over the full vote table")
{
    for (unsigned bits = 0; bits < 8; ++bits) {
        Votes votes;
        unsigned yes = 0;
        for (std::size_t i = 0; i < all_voters.size(); ++i) {
            bool const flag = (bits >> i) & 1U;
            votes[std::string(to_string(all_voters[i]))] = flag;
            yes += flag ? 1 : 0;
        }
        CAPTURE(bits);
        CHECK(majority_label(votes, VulnCategory::Reentrancy) == (yes >= 2));
        CHECK(majority_label(votes, VulnCategory::TxOrigin) == (yes >= 1));
        CHECK(majority_label(votes, VulnCategory::Delegatecall) == (yes >= 1));
    }
    CHECK_THROWS_AS(majority_label({}, static_cast<VulnCategory>(9)), std::invalid_argument);
}

TEST_CASE("label lines round-trip and aggregate")
{
    std::vector<LabelVote> votes{
        {"Bank", "withdrawBalance", VulnCategory::Reentrancy, "v1-strict", true},
        {"Bank", "withdrawBalance", VulnCategory::Reentrancy, "v2-taint", false},
        {"Bank", "withdrawBalance", VulnCategory::Reentrancy, "v3-syntactic", true},
        {"Bank", "deposit", VulnCategory::TxOrigin, "v3-syntactic", true},
    };
    auto const text = format_label_lines(votes);
    CHECK(parse_label_lines(text, "labels.jsonl") == votes);
    auto const records = aggregate_labels(votes);
    REQUIRE(records.size() == 2);
    CHECK(records[0].function == "deposit");
    CHECK(records[0].label);
    CHECK(records[1].function == "withdrawBalance");
    CHECK(records[1].votes.size() == 3);
    CHECK(records[1].label);

    // A later vote from the same voter replaces the earlier one.
    votes.push_back({"Bank", "withdrawBalance", VulnCategory::Reentrancy, "v1-strict", false});
    CHECK_FALSE(aggregate_labels(votes)[1].label);
}

TEST_CASE("malformed label lines name their source line")
{
    std::string const good =
        R"({"contract":"A","function":"f","category":"reentrancy","voterId":"v1-strict","flag":true})";
    auto message = [](std::string const &text) {
        try {
            parse_label_lines(text, "in.jsonl");
        }
        catch (LabelError const &e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    CHECK(parse_label_lines(good + "\n\n" + good + "\n", "in.jsonl").size() == 2);
    CHECK(message(good + "\nnot json\n").find("in.jsonl:2") != std::string::npos);
    CHECK(message("\n" + std::string(R"({"contract":"A"})")).find("in.jsonl:2") !=
          std::string::npos);
    auto bad_category = good;
    bad_category.replace(bad_category.find("reentrancy"), 10, "overflow");
    CHECK(message(bad_category).find("in.jsonl:1") != std::string::npos);
}

TEST_CASE("vote corpus covers every function, category and voter")
{
    auto const pkgs = testing::load_fixture("walletlogic");
    auto const votes = vote_corpus(pkgs);
    std::size_t functions = 0;
    for (auto const &p : pkgs) {
        functions += p.functions.size();
    }
    CHECK(votes.size() == functions * 3 * 3);
    auto const records = aggregate_labels(votes);
    CHECK(records.size() == functions * 3);
    for (auto const &r : records) {
        CHECK(r.label == majority_label(r.votes, r.category));
    }
}

TEST_CASE("decision tree fits XOR exactly at depth 2")
{
    std::vector<FeatureVector> x{{0, 0}, {0, 1}, {1, 0}, {1, 1}};
    Labels y{0, 1, 1, 0};
    // Duplicate the points so no first split has zero gain.
    auto x2 = x;
    auto y2 = y;
    x2.push_back({0, 1});
    y2.push_back(1);
    auto const tree = fit_tree(x2, y2, std::vector<double>(x2.size(), 1.0), {2, 2});
    CHECK(tree.depth() <= 2);
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(tree.predict(x[i]) == (y[i] == 1));
    }
    auto const shallow = fit_tree(x2, y2, std::vector<double>(x2.size(), 1.0), {1, 2});
    std::size_t correct = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        correct += shallow.predict(x[i]) == (y[i] == 1) ? 1 : 0;
    }
    CHECK(correct < 4);
}

TEST_CASE("decision tree leaf ties go to the training majority")
{
    std::vector<FeatureVector> x{{0}, {0}, {1}};
    Labels y{1, 0, 0};
    auto const tree = fit_tree(x, y, {1, 1, 1}, {8, 2});
    CHECK(tree.score(std::vector<double>{0}) == doctest::Approx(0.5));
    CHECK_FALSE(tree.predict(std::vector<double>{0}));
    CHECK_FALSE(tree.tie_positive);
}

TEST_CASE("classifier rejects single-class data and wrong dimensions")
{
    TrainingSet one;
    one.x = {FeatureVector(27, 0.0), FeatureVector(27, 1.0)};
    one.y = {0, 0};
    CHECK_THROWS_AS(train_classifier(one, ModelKind::EEC, 1), std::invalid_argument);
    TrainingSet narrow;
    narrow.x = {FeatureVector(26, 0.0), FeatureVector(26, 1.0)};
    narrow.y = {0, 1};
    CHECK_THROWS_AS(train_classifier(narrow, ModelKind::DecisionTree, 1),
                    std::invalid_argument);

    TrainingSet ok;
    ok.x = {FeatureVector(27, 0.0), FeatureVector(27, 1.0)};
    ok.y = {0, 1};
    auto const m = train_classifier(ok, ModelKind::EEC, 1);
    CHECK_THROWS_AS(predict(m, FeatureVector(26, 0.0)), std::invalid_argument);
    CHECK_NOTHROW(predict(m, FeatureVector(27, 0.0)));
}

TEST_CASE("prediction threshold is inclusive")
{
    TrainingSet data;
    data.x = {FeatureVector(27, 0.0), FeatureVector(27, 0.0), FeatureVector(27, 1.0)};
    data.y = {1, 0, 0};
    auto m = train_classifier(data, ModelKind::DecisionTree, 1);
    FeatureVector const zero(27, 0.0);
    REQUIRE(m.score(zero) == doctest::Approx(0.5));
    CHECK(predict(m, zero).suspicious);
    m.params.threshold = 0.7;
    CHECK_FALSE(predict(m, zero).suspicious);
    m.params.threshold = 0.3;
    CHECK(predict(m, zero).suspicious);
}

TEST_CASE("EEC bags are class-balanced and recall is high on separable data")
{
    for (std::uint64_t seed : {1U, 2U}) {
        auto const s = separable(seed, 5000, 5000);
        auto const eec = train_classifier(s.train, ModelKind::EEC, seed);
        REQUIRE(eec.bags.size() == 10);
        std::size_t const pos =
            static_cast<std::size_t>(std::count(s.train.y.begin(), s.train.y.end(), 1));
        for (auto const &bag : eec.bags) {
            CHECK(bag.positives == bag.negatives);
            CHECK(bag.positives == pos);
            CHECK_FALSE(bag.trees.empty());
            CHECK(bag.trees.size() <= 10);
            for (auto const &t : bag.trees) {
                CHECK(t.depth() <= 3);
            }
        }
        auto const c = confusion_at(scores_of(eec, s.test), s.test.y, 0.5);
        CAPTURE(seed);
        CHECK(c.recall() >= 0.9);
    }
}

TEST_CASE("training is deterministic and seed-sensitive")
{
    auto const s = separable(9, 600, 10);
    auto const a = train_classifier(s.train, ModelKind::EEC, 5);
    auto const b = train_classifier(s.train, ModelKind::EEC, 5);
    auto const c = train_classifier(s.train, ModelKind::EEC, 6);
    CHECK(a == b);
    CHECK_FALSE(a == c);
}

TEST_CASE("deduplicate keeps the first occurrence of each vector and label")
{
    TrainingSet d;
    d.x = {{1, 2}, {1, 2}, {1, 2}, {3, 4}};
    d.y = {1, 1, 0, 0};
    auto const out = deduplicate(d);
    CHECK(out.x == std::vector<FeatureVector>{{1, 2}, {1, 2}, {3, 4}});
    CHECK(out.y == Labels{1, 0, 0});
}

TEST_CASE("precision and recall arithmetic")
{
    std::vector<double> scores;
    Labels labels;
    for (int i = 0; i < 26; ++i) {
        scores.push_back(0.9);
        labels.push_back(1);
    }
    for (int i = 0; i < 74; ++i) {
        scores.push_back(0.9);
        labels.push_back(0);
    }
    for (int i = 0; i < 2; ++i) {
        scores.push_back(0.1);
        labels.push_back(1);
    }
    auto const c = confusion_at(scores, labels, 0.5);
    CHECK(c.tp == 26);
    CHECK(c.fp == 74);
    CHECK(c.precision() == doctest::Approx(0.26));
    CHECK(c.recall() == doctest::Approx(26.0 / 28.0));

    auto const curve = pr_curve(scores, labels);
    REQUIRE(curve.size() == 2);
    CHECK(curve[0].threshold == 0.9);
    CHECK(curve[1].recall == 1.0);
    // Threshold 0.1 reaches precision 28/102.
    CHECK(recall_at_precision(scores, labels, 0.26) == 1.0);
    CHECK(recall_at_precision(scores, labels, 0.28) == 0.0);
}

TEST_CASE("raising the threshold never raises recall or lowers precision")
{
    Rng rng(77);
    for (int round = 0; round < 50; ++round) {
        std::vector<double> scores;
        Labels labels;
        auto const n = 5 + rng.below(60);
        for (std::uint64_t i = 0; i < n; ++i) {
            bool const pos = rng.chance(0.3);
            labels.push_back(pos ? 1 : 0);
            // Scores correlate with labels so precision rises with the threshold.
            scores.push_back(pos ? 1.0 : 0.0);
        }
        auto const curve = pr_curve(scores, labels);
        for (std::size_t i = 1; i < curve.size(); ++i) {
            CHECK(curve[i].threshold < curve[i - 1].threshold);
            CHECK(curve[i].recall >= curve[i - 1].recall);
        }
        for (auto const &p : curve) {
            CHECK(p.precision >= 0.0);
            CHECK(p.precision <= 1.0);
            CHECK(p.recall >= 0.0);
            CHECK(p.recall <= 1.0);
        }
        // Precision monotonicity holds when each score separates classes.
        for (std::size_t i = 1; i < curve.size(); ++i) {
            CHECK(curve[i].precision <= curve[i - 1].precision);
        }
    }
}

TEST_CASE("recall is monotone in the threshold on arbitrary scores")
{
    Rng rng(78);
    for (int round = 0; round < 50; ++round) {
        std::vector<double> scores;
        Labels labels;
        auto const n = 1 + rng.below(80);
        for (std::uint64_t i = 0; i < n; ++i) {
            labels.push_back(rng.chance(0.4) ? 1 : 0);
            scores.push_back(static_cast<double>(rng.below(10)) / 10.0);
        }
        auto const curve = pr_curve(scores, labels);
        for (std::size_t i = 1; i < curve.size(); ++i) {
            CHECK(curve[i].recall >= curve[i - 1].recall);
        }
    }
}

TEST_CASE("coverage rate")
{
    CHECK(coverage_rate({"a", "b", "c"}, {"b", "c", "d"}) == doctest::Approx(2.0 / 3.0));
    CHECK(coverage_rate({"a", "b", "c"}, {"a", "c"}) == 1.0);
    CHECK_FALSE(coverage_rate({"a"}, {}).has_value());
    CHECK(coverage_rate({}, {"a"}) == 0.0);

    Rng rng(10);
    for (int round = 0; round < 100; ++round) {
        std::set<std::string> m;
        std::set<std::string> t;
        for (int i = 0; i < 12; ++i) {
            if (rng.chance(0.5)) {
                m.insert(std::to_string(i));
            }
            if (rng.chance(0.5)) {
                t.insert(std::to_string(i));
            }
        }
        auto const cr = coverage_rate(m, t);
        REQUIRE(cr.has_value() == !t.empty());
        if (cr) {
            CHECK(*cr >= 0.0);
            CHECK(*cr <= 1.0);
            // Growing R_m never lowers CR.
            auto bigger = m;
            bigger.insert(std::to_string(rng.below(12)));
            CHECK(*coverage_rate(bigger, t) >= *cr);
        }
    }
}

TEST_CASE("evaluate reports the curve, confusion and per-tool coverage")
{
    TrainingSet data;
    data.x = {FeatureVector(27, 0.0), FeatureVector(27, 1.0)};
    data.y = {0, 1};
    auto const m = train_classifier(data, ModelKind::DecisionTree, 1);
    std::vector<LabeledExample> test{
        {"A.f", FeatureVector(27, 1.0), true},
        {"A.g", FeatureVector(27, 1.0), false},
        {"B.h", FeatureVector(27, 0.0), true},
        {"B.k", FeatureVector(27, 0.0), false},
    };
    auto const ev = evaluate(m, test,
                             {{"v1-strict", {"A.f", "B.h"}}, {"v3-syntactic", {}}});
    CHECK(ev.true_positives == std::set<std::string>{"A.f"});
    CHECK(ev.at_threshold.tp == 1);
    CHECK(ev.at_threshold.fp == 1);
    CHECK(ev.coverage.at("v1-strict") == doctest::Approx(0.5));
    CHECK_FALSE(ev.coverage.at("v3-syntactic").has_value());
    CHECK(ev.curve.size() == 2);
    CHECK_THROWS_AS(evaluate(m, std::span<LabeledExample const>{}, {}), std::invalid_argument);
}

TEST_CASE("model files round-trip byte for byte")
{
    auto const s = separable(4, 400, 10);
    for (auto kind : {ModelKind::EEC, ModelKind::DecisionTree}) {
        auto m = train_classifier(s.train, kind, 11);
        m.embedding = train_embedding(small_corpus(), 2);
        m.category = VulnCategory::TxOrigin;
        auto const text = serialize_model(m);
        auto const back = parse_model(text);
        CHECK(back == m);
        CHECK(serialize_model(back) == text);
        for (auto const &x : s.train.x) {
            CHECK(back.score(x) == m.score(x));
        }
    }
    CHECK_THROWS_AS(parse_model("{}"), ModelError);
    CHECK_THROWS_AS(parse_model("not json"), ModelError);
    auto const m = train_classifier(s.train, ModelKind::DecisionTree, 1);
    auto text = serialize_model(m);
    text.replace(text.find("xcfuzz-model/1"), 14, "xcfuzz-model/9");
    CHECK_THROWS_AS(parse_model(text), ModelError);
}

TEST_CASE("the full pipeline yields byte-identical models")
{
    auto pkgs = testing::load_fixture("bank");
    for (auto const &name : {"safebank", "txorigin", "delegation", "walletlogic", "logchain"}) {
        auto more = testing::load_fixture(name);
        pkgs.insert(pkgs.end(), more.begin(), more.end());
    }
    auto const samples = extract_samples(pkgs);
    auto const records = aggregate_labels(vote_corpus(pkgs));
    auto const a = train_category_model(samples, records, VulnCategory::Reentrancy, 3);
    auto const b = train_category_model(samples, records, VulnCategory::Reentrancy, 3);
    CHECK(serialize_model(a) == serialize_model(b));
    CHECK(a.category == VulnCategory::Reentrancy);
    CHECK_FALSE(a.embedding.vectors.empty());

    FunctionSample const *withdraw = nullptr;
    for (auto const &s : samples) {
        if (s.contract == "Bank" && s.function == "withdrawBalance") {
            withdraw = &s;
        }
    }
    REQUIRE(withdraw != nullptr);
    CHECK(predict(a, *withdraw).suspicious);
}

TEST_CASE("derived seeds separate streams")
{
    std::set<std::uint64_t> seen;
    for (std::uint64_t s = 0; s < 4; ++s) {
        for (std::uint64_t k = 0; k < 64; ++k) {
            seen.insert(derive_seed(s, k));
        }
    }
    CHECK(seen.size() == 256);
    CHECK(derive_seed(1, 2) == derive_seed(1, 2));
    Rng r(5);
    for (int i = 0; i < 1000; ++i) {
        CHECK(r.below(7) < 7);
        auto const u = r.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    CHECK(r.below(0) == 0);
}

