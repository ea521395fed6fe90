#include <xcfuzz/cli/commands.hpp>

#include <xcfuzz/analysis/dot.hpp>
#include <xcfuzz/analysis/function.hpp>
#include <xcfuzz/cli/files.hpp>
#include <xcfuzz/cli/manifest.hpp>
#include <xcfuzz/learner/model_io.hpp>
#include <xcfuzz/learner/rng.hpp>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdlib>
#include <ostream>

namespace xcfuzz::cli
{
    using nlohmann::json;

    namespace
    {
        std::string digest(std::string_view text)
        {
            return fmt::format("fnv1a64:{:016x}", learner::fnv1a64(text));
        }

        std::string hex(vm::Word w)
        {
            return fmt::format("{:#x}", w);
        }

        // Artifacts go to `out_path` atomically, or to `out` when it is empty.
        void emit_artifact(std::string const &out_path, std::string const &content,
                           std::ostream &out)
        {
            if (out_path.empty()) {
                out << content;
            }
            else {
                write_atomic(out_path, content);
            }
        }

        std::vector<std::string> category_names()
        {
            std::vector<std::string> names;
            for (auto c : oracles::all_categories) {
                names.emplace_back(oracles::to_string(c));
            }
            return names;
        }
    }

    std::string model_hash(learner::EnsembleModel const &model)
    {
        return digest(learner::serialize_model(model));
    }

    std::string corpus_hash(std::span<vm::ContractPackage const> packages)
    {
        json doc = json::array();
        for (auto const &p : packages) {
            std::string code;
            for (auto b : p.code) {
                code += fmt::format("{:02x}", b);
            }
            json storage = json::object();
            for (auto const &[k, v] : p.initial_storage) {
                storage[hex(k)] = hex(v);
            }
            json functions = json::array();
            for (auto const &f : p.functions) {
                json params = json::array();
                for (auto k : f.params) {
                    params.push_back(std::string(vm::to_string(k)));
                }
                functions.push_back({{"name", f.name},
                                     {"selector", f.selector ? json(hex(*f.selector)) : json()},
                                     {"entryPc", f.entry_pc},
                                     {"params", params},
                                     {"isPublic", f.is_public},
                                     {"hasModifier", f.has_modifier},
                                     {"isFallback", f.is_fallback},
                                     {"calls", f.declared_calls}});
            }
            doc.push_back({{"name", p.name},
                           {"address", hex(p.address)},
                           {"code", code},
                           {"balance", p.balance},
                           {"storage", storage},
                           {"functions", functions}});
        }
        return digest(doc.dump());
    }

    LoadedModel load_model(std::filesystem::path const &file)
    {
        try {
            auto model = learner::parse_model(read_text(file));
            auto hash = model_hash(model);
            return {std::move(model), std::move(hash)};
        }
        catch (learner::ModelError const &e) {
            throw learner::ModelError(fmt::format("{}: {}", file.string(), e.what()));
        }
    }

    std::vector<LoadedModel> load_model_dir(std::filesystem::path const &dir)
    {
        if (!std::filesystem::is_directory(dir)) {
            throw std::runtime_error(fmt::format("{}: not a directory", dir.string()));
        }
        std::vector<std::filesystem::path> files;
        for (auto const &entry : std::filesystem::directory_iterator(dir)) {
            if (entry.is_regular_file() && entry.path().extension() == ".json") {
                files.push_back(entry.path());
            }
        }
        if (files.empty()) {
            throw std::runtime_error(fmt::format("{}: no *.json model files", dir.string()));
        }
        std::sort(files.begin(), files.end());
        std::vector<LoadedModel> models;
        for (auto const &f : files) {
            models.push_back(load_model(f));
        }
        return models;
    }

    CorpusPredictions predict_corpus(std::span<vm::ContractPackage const> packages,
                                     std::span<LoadedModel const> models)
    {
        CorpusPredictions preds;
        auto const samples = learner::extract_samples(packages);
        std::map<std::string, std::size_t> contract_index;
        for (auto const &p : packages) {
            contract_index[p.name] = preds.contracts.size();
            preds.contracts.push_back({p.name, 0.0, false});
            preds.suspicious_contracts[p.name] = false;
        }
        for (auto const &s : samples) {
            FunctionPrediction fp{s.contract, s.function, {}, false};
            double best = 0.0;
            for (auto const &m : models) {
                auto const p = learner::predict(m.model, s);
                auto const name = std::string(oracles::to_string(m.model.category));
                auto [it, inserted] = fp.scores.emplace(name, p.score);
                if (!inserted) {
                    it->second = std::max(it->second, p.score);
                }
                fp.suspicious = fp.suspicious || p.suspicious;
                best = std::max(best, p.score);
            }
            auto &cp = preds.contracts[contract_index.at(s.contract)];
            cp.score = std::max(cp.score, best);
            cp.suspicious = cp.suspicious || fp.suspicious;
            preds.suspicious_contracts[s.contract] = cp.suspicious;
            preds.suspicious_functions[s.contract + "." + s.function] = fp.suspicious;
            preds.functions.push_back(std::move(fp));
        }
        return preds;
    }

    std::string predictions_document(CorpusPredictions const &preds,
                                     std::span<LoadedModel const> models)
    {
        json j;
        j["schema"] = predictions_schema;
        json ms = json::array();
        for (auto const &m : models) {
            ms.push_back({{"category", std::string(oracles::to_string(m.model.category))},
                          {"kind", std::string(learner::to_string(m.model.kind))},
                          {"threshold", m.model.params.threshold},
                          {"hash", m.hash}});
        }
        j["models"] = ms;
        json contracts = json::array();
        for (auto const &c : preds.contracts) {
            contracts.push_back(
                {{"contract", c.contract}, {"score", c.score}, {"suspicious", c.suspicious}});
        }
        json functions = json::array();
        for (auto const &f : preds.functions) {
            functions.push_back({{"contract", f.contract},
                                 {"function", f.function},
                                 {"scores", f.scores},
                                 {"suspicious", f.suspicious}});
        }
        j["contracts"] = contracts;
        j["functions"] = functions;
        return j.dump(2) + "\n";
    }

    std::string_view to_string(FuzzMode m)
    {
        return m == FuzzMode::Guided ? "guided" : "uniform";
    }

    FuzzMode fuzz_mode_from_string(std::string_view text)
    {
        if (text == "guided") {
            return FuzzMode::Guided;
        }
        if (text == "uniform") {
            return FuzzMode::Uniform;
        }
        throw std::invalid_argument(fmt::format("unknown fuzz mode '{}'", text));
    }

    json fuzz_config_json(FuzzOptions const &options, std::span<LoadedModel const> models,
                          std::string const &corpus_digest)
    {
        auto const &c = options.campaign;
        json ms = json::array();
        for (auto const &m : models) {
            ms.push_back({{"category", std::string(oracles::to_string(m.model.category))},
                          {"kind", std::string(learner::to_string(m.model.kind))},
                          {"hash", m.hash}});
        }
        return {{"mode", std::string(to_string(options.mode))},
                {"seed", c.seed},
                {"workers", c.workers},
                {"budgetVulnerable", c.budget.vulnerable},
                {"budgetBenign", c.budget.benign},
                {"budgetMode", std::string(fuzzer::to_string(c.budget.mode))},
                {"stepBudget", c.budget.step_budget},
                {"mutationsPerRound", c.mutations_per_round},
                {"maxDepth", options.max_depth},
                {"attacker", hex(c.attacker)},
                {"attackerBalance", c.attacker_balance},
                {"reentryLimit", c.reentry_limit},
                {"models", ms},
                {"corpusHash", corpus_digest}};
    }

    ReportDocument fuzz_corpus(std::vector<vm::ContractPackage> const &packages,
                               std::span<LoadedModel const> models, FuzzOptions const &options)
    {
        if (options.mode == FuzzMode::Guided && models.empty()) {
            throw std::invalid_argument("guided mode needs at least one model");
        }
        ReportDocument doc;
        doc.config = fuzz_config_json(options, models, corpus_hash(packages));
        doc.config_hash = config_hash(doc.config);
        for (auto const &p : packages) {
            doc.corpus.contracts.push_back(p.name);
            doc.corpus.functions += p.functions.size();
        }

        auto const preds = predict_corpus(packages, models);
        doc.contract_predictions = preds.contracts;
        doc.function_predictions = preds.functions;

        fuzzer::Campaign campaign;
        campaign.packages = packages;
        campaign.config = options.campaign;
        scheduler::SuspicionMap suspicion;
        if (options.mode == FuzzMode::Guided) {
            suspicion = preds.suspicious_functions;
            campaign.suspicious_contracts = preds.suspicious_contracts;
        }
        else {
            for (auto const &p : packages) {
                campaign.suspicious_contracts[p.name] = true;
            }
        }
        auto const cg = analysis::build_call_graph(packages);
        campaign.queue = scheduler::build_queue(packages, cg, suspicion, {options.max_depth});
        doc.queue = campaign.queue;
        doc.fuzz = fuzzer::run_campaign(campaign);
        sort_findings(doc.fuzz.findings);
        return doc;
    }

    void configure_logging()
    {
        auto logger = std::make_shared<spdlog::logger>(
            "xcfuzz", std::make_shared<spdlog::sinks::stderr_sink_mt>());
        logger->set_pattern("%Y-%m-%dT%H:%M:%S.%e level=%l %v");
        auto level = spdlog::level::info;
        if (char const *env = std::getenv("XCFUZZ_LOG"); env != nullptr && *env != '\0') {
            std::string const name(env);
            level = spdlog::level::from_str(name);
            // from_str maps unknown names to off; keep info for those.
            if (level == spdlog::level::off && name != "off") {
                level = spdlog::level::info;
            }
        }
        logger->set_level(level);
        spdlog::set_default_logger(std::move(logger));
    }

    namespace
    {
        struct TrainArgs
        {
            std::string corpus, labels, category, kind = "eec", out;
            std::uint64_t seed = 0;
            learner::EnsembleParams params;
        };

        struct FuzzArgs
        {
            std::string corpus, models, out, mode = "guided", budget_mode = "seconds";
            double vulnerable = 180.0, benign = 30.0;
            std::size_t workers = 1, max_depth = scheduler::default_max_depth;
            std::size_t mutations = fuzzer::default_mutations_per_round, reentry_limit = 1;
            std::uint64_t seed = 0, step_budget = fuzzer::default_fuzz_step_budget;
        };

        struct AnalyzeArgs
        {
            std::string corpus, models, out, graph_dir = "graphs";
            bool emit_graphs = false, emit_queue = false;
            std::size_t max_depth = scheduler::default_max_depth;
        };

        int do_train(TrainArgs const &a, std::ostream &out)
        {
            auto const packages = ingest(a.corpus);
            auto const votes = a.labels.empty()
                                   ? learner::vote_corpus(packages)
                                   : learner::parse_label_lines(read_text(a.labels), a.labels);
            auto const records = learner::aggregate_labels(votes);
            auto const samples = learner::extract_samples(packages);
            auto const model = learner::train_category_model(
                samples, records, oracles::category_from_string(a.category), a.seed,
                learner::model_kind_from_string(a.kind), a.params);
            emit_artifact(a.out, learner::serialize_model(model), out);
            return 0;
        }

        std::vector<LoadedModel> gather_models(std::vector<std::string> const &files,
                                               std::string const &dir)
        {
            std::vector<LoadedModel> models;
            if (!dir.empty()) {
                models = load_model_dir(dir);
            }
            for (auto const &f : files) {
                models.push_back(load_model(f));
            }
            return models;
        }

        int do_analyze(AnalyzeArgs const &a, std::ostream &out)
        {
            auto const packages = ingest(a.corpus);
            auto const cg = analysis::build_call_graph(packages);
            std::vector<LoadedModel> models;
            if (!a.models.empty()) {
                models = load_model_dir(a.models);
            }
            auto const preds = predict_corpus(packages, models);
            auto const queue =
                scheduler::build_queue(packages, cg, preds.suspicious_functions, {a.max_depth});

            if (a.emit_graphs) {
                std::filesystem::create_directories(a.graph_dir);
                auto const dir = std::filesystem::path(a.graph_dir);
                write_atomic(dir / "callgraph.dot", analysis::call_graph_to_dot(cg));
                for (auto const &p : packages) {
                    for (auto const &f : p.functions) {
                        analysis::FunctionAnalysis const fa(p, f);
                        auto const name = p.name + "." + f.name;
                        write_atomic(dir / (name + ".cfg.dot"), analysis::cfg_to_dot(fa.cfg(), name));
                    }
                }
            }
            if (a.emit_queue) {
                json j;
                j["schema"] = queue_schema;
                j["queue"] = queue_to_json(queue);
                emit_artifact(a.out, j.dump(2) + "\n", out);
            }
            else {
                std::size_t functions = 0;
                for (auto const &p : packages) {
                    functions += p.functions.size();
                }
                auto const summary = fmt::format(
                    "contracts {}  functions {}  call edges {}  unresolved sites {}  queued paths {}\n",
                    packages.size(), functions, cg.edges().size(), cg.unresolved().size(),
                    queue.size());
                emit_artifact(a.out, summary, out);
            }
            return 0;
        }

        int do_fuzz(FuzzArgs const &a, std::ostream &out)
        {
            auto const packages = ingest(a.corpus);
            FuzzOptions options;
            options.mode = fuzz_mode_from_string(a.mode);
            options.max_depth = a.max_depth;
            auto &c = options.campaign;
            c.seed = a.seed;
            c.workers = a.workers;
            c.mutations_per_round = a.mutations;
            c.reentry_limit = a.reentry_limit;
            c.budget.vulnerable = a.vulnerable;
            c.budget.benign = a.benign;
            c.budget.mode = fuzzer::budget_mode_from_string(a.budget_mode);
            c.budget.step_budget = a.step_budget;
            std::vector<LoadedModel> models;
            if (!a.models.empty()) {
                models = load_model_dir(a.models);
            }
            auto const doc = fuzz_corpus(packages, models, options);
            emit_artifact(a.out, serialize_report(doc), out);
            return 0;
        }
    }

    int run_cli(std::vector<std::string> const &args, std::ostream &out, std::ostream &err)
    {
        CLI::App app{"ML-guided cross-contract fuzzer for stack-machine contracts", "xcfuzz"};
        app.require_subcommand(1);
        auto const categories = category_names();

        TrainArgs train;
        auto *train_cmd = app.add_subcommand("train", "Train one category model on a corpus");
        train_cmd->add_option("--corpus", train.corpus, "Corpus directory")->required();
        train_cmd->add_option("--labels", train.labels,
                              "Label JSONL file (default: built-in voters)");
        train_cmd->add_option("--category", train.category, "Vulnerability category")
            ->required()
            ->check(CLI::IsMember(categories));
        train_cmd->add_option("--seed", train.seed, "Random seed");
        train_cmd->add_option("--kind", train.kind, "Classifier")
            ->check(CLI::IsMember({"eec", "decision-tree"}));
        train_cmd->add_option("--bags", train.params.bags, "EEC bag count")
            ->check(CLI::PositiveNumber);
        train_cmd->add_option("--rounds", train.params.rounds, "Boosting rounds per bag")
            ->check(CLI::PositiveNumber);
        train_cmd->add_option("--threshold", train.params.threshold, "Suspicion threshold")
            ->check(CLI::Range(0.0, 1.0));
        train_cmd->add_option("--out", train.out, "Model file (default: stdout)");

        std::string label_corpus, label_out;
        auto *label_cmd = app.add_subcommand("label", "Write built-in voter labels as JSONL");
        label_cmd->add_option("--corpus", label_corpus, "Corpus directory")->required();
        label_cmd->add_option("--out", label_out, "Label file (default: stdout)");

        std::vector<std::string> predict_models;
        std::string predict_dir, predict_corpus_dir, predict_out;
        auto *predict_cmd = app.add_subcommand("predict", "Score every function of a corpus");
        predict_cmd->add_option("--model", predict_models, "Model file (repeatable)");
        predict_cmd->add_option("--models", predict_dir, "Directory of model files");
        predict_cmd->add_option("--corpus", predict_corpus_dir, "Corpus directory")->required();
        predict_cmd->add_option("--out", predict_out, "Predictions file (default: stdout)");

        AnalyzeArgs analyze;
        auto *analyze_cmd =
            app.add_subcommand("analyze", "Static analysis, graphs and the prioritized queue");
        analyze_cmd->add_option("--corpus", analyze.corpus, "Corpus directory")->required();
        analyze_cmd->add_option("--models", analyze.models, "Directory of model files");
        analyze_cmd->add_option("--max-depth", analyze.max_depth, "Caller chain depth bound")
            ->check(CLI::PositiveNumber);
        analyze_cmd->add_flag("--emit-graphs", analyze.emit_graphs, "Write Graphviz files");
        analyze_cmd->add_option("--graph-dir", analyze.graph_dir, "Graphviz output directory");
        analyze_cmd->add_flag("--emit-queue", analyze.emit_queue,
                              "Dump the queue with every score component");
        analyze_cmd->add_option("--out", analyze.out, "Output file (default: stdout)");

        FuzzArgs fuzz;
        auto *fuzz_cmd = app.add_subcommand("fuzz", "Run a prioritized fuzzing campaign");
        fuzz_cmd->add_option("--corpus", fuzz.corpus, "Corpus directory")->required();
        fuzz_cmd->add_option("--models", fuzz.models, "Directory of model files");
        fuzz_cmd->add_option("--mode", fuzz.mode, "guided or uniform")
            ->check(CLI::IsMember({"guided", "uniform"}));
        fuzz_cmd->add_option("--budget-vulnerable", fuzz.vulnerable,
                             "Budget for suspicious contracts")
            ->check(CLI::NonNegativeNumber);
        fuzz_cmd->add_option("--budget-benign", fuzz.benign,
                             "Budget for benign contracts (0 skips them)")
            ->check(CLI::NonNegativeNumber);
        fuzz_cmd->add_option("--budget-mode", fuzz.budget_mode, "seconds or attempts")
            ->check(CLI::IsMember({"seconds", "attempts"}));
        fuzz_cmd->add_option("--workers", fuzz.workers, "Worker threads")
            ->check(CLI::PositiveNumber);
        fuzz_cmd->add_option("--seed", fuzz.seed, "Random seed");
        fuzz_cmd->add_option("--max-depth", fuzz.max_depth, "Caller chain depth bound")
            ->check(CLI::PositiveNumber);
        fuzz_cmd->add_option("--step-budget", fuzz.step_budget, "Steps per transaction")
            ->check(CLI::PositiveNumber);
        fuzz_cmd->add_option("--mutations-per-round", fuzz.mutations, "Attempts per path per round")
            ->check(CLI::PositiveNumber);
        fuzz_cmd->add_option("--reentry-limit", fuzz.reentry_limit,
                             "Attacker fallback re-entries per transaction");
        fuzz_cmd->add_option("--out", fuzz.out, "Report file (default: stdout)");

        std::string report_in, report_format = "text";
        auto *report_cmd = app.add_subcommand("report", "Render a report document");
        report_cmd->add_option("--in", report_in, "Report file")->required();
        report_cmd->add_option("--format", report_format, "text or json")
            ->check(CLI::IsMember({"text", "json"}));

        if (!args.empty() && !args.front().starts_with('-') &&
            app.get_subcommand_no_throw(args.front()) == nullptr) {
            err << "error: unknown subcommand '" << args.front() << "'\n\n" << app.help();
            return 2;
        }

        try {
            std::vector<std::string> reversed(args.rbegin(), args.rend());
            app.parse(reversed);
        }
        catch (CLI::ParseError const &e) {
            if (e.get_exit_code() == 0) {
                return app.exit(e, out, err);
            }
            auto const selected = app.get_subcommands();
            err << "error: " << e.what() << "\n\n"
                << (selected.empty() ? app.help() : selected.front()->help());
            return 2;
        }

        try {
            if (train_cmd->parsed()) {
                return do_train(train, out);
            }
            if (label_cmd->parsed()) {
                auto const packages = ingest(label_corpus);
                auto const votes = learner::vote_corpus(packages);
                emit_artifact(label_out, learner::format_label_lines(votes), out);
                return 0;
            }
            if (predict_cmd->parsed()) {
                auto const models = gather_models(predict_models, predict_dir);
                if (models.empty()) {
                    err << "error: predict needs --model or --models\n\n" << predict_cmd->help();
                    return 2;
                }
                auto const packages = ingest(predict_corpus_dir);
                emit_artifact(predict_out,
                              predictions_document(predict_corpus(packages, models), models), out);
                return 0;
            }
            if (analyze_cmd->parsed()) {
                return do_analyze(analyze, out);
            }
            if (fuzz_cmd->parsed()) {
                return do_fuzz(fuzz, out);
            }
            if (report_cmd->parsed()) {
                auto const doc = parse_report(read_text(report_in));
                out << (report_format == "json" ? serialize_report(doc) : render_text(doc));
                return 0;
            }
        }
        catch (std::exception const &e) {
            err << "error: " << e.what() << "\n";
            return 1;
        }
        return 2;
    }
}
