#include <xcfuzz/cli/report.hpp>

#include <xcfuzz/cli/manifest.hpp>
#include <xcfuzz/learner/rng.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <tuple>

namespace xcfuzz::cli
{
    using nlohmann::json;

    namespace
    {
        std::string hex(vm::Word w)
        {
            return fmt::format("{:#x}", w);
        }

        vm::Word word_of(json const &j)
        {
            if (j.is_string()) {
                return parse_word(j.get<std::string>());
            }
            return j.get<vm::Word>();
        }

        json optional_hex(std::optional<vm::Word> w)
        {
            return w ? json(hex(*w)) : json(nullptr);
        }

        std::optional<vm::Word> optional_word(json const &j)
        {
            if (j.is_null()) {
                return std::nullopt;
            }
            return word_of(j);
        }

        json ref_json(scheduler::FunctionRef const &r)
        {
            return r.str();
        }

        scheduler::FunctionRef ref_from(json const &j)
        {
            auto const s = j.get<std::string>();
            auto const dot = s.find('.');
            if (dot == std::string::npos) {
                throw ReportError(fmt::format("function reference '{}' lacks a contract", s));
            }
            return {s.substr(0, dot), s.substr(dot + 1)};
        }

        json shape_json(analysis::FunctionShape const &s)
        {
            return {{"callers", s.callers},
                    {"params", s.params},
                    {"complexity", s.complexity},
                    {"condDistance", s.cond_distance}};
        }

        analysis::FunctionShape shape_from(json const &j)
        {
            analysis::FunctionShape s;
            s.callers = j.at("callers").get<std::size_t>();
            s.params = j.at("params").get<std::size_t>();
            s.complexity = j.at("complexity").get<std::size_t>();
            s.cond_distance = j.at("condDistance").get<std::size_t>();
            return s;
        }

        json tx_json(vm::TransactionRequest const &tx)
        {
            return {{"caller", hex(tx.caller)},
                    {"origin", hex(tx.origin)},
                    {"target", hex(tx.target)},
                    {"selector", tx.selector ? json(hex(*tx.selector)) : json(nullptr)},
                    {"args", tx.args},
                    {"value", tx.value},
                    {"stepBudget", tx.step_budget}};
        }

        vm::TransactionRequest tx_from(json const &j)
        {
            vm::TransactionRequest tx;
            tx.caller = word_of(j.at("caller"));
            tx.origin = word_of(j.at("origin"));
            tx.target = word_of(j.at("target"));
            if (auto const s = optional_word(j.at("selector"))) {
                tx.selector = static_cast<vm::Selector>(*s);
            }
            tx.args = j.at("args").get<std::vector<vm::Word>>();
            tx.value = j.at("value").get<vm::Word>();
            tx.step_budget = j.at("stepBudget").get<std::uint64_t>();
            return tx;
        }

        json harness_json(fuzzer::HarnessConfig const &h)
        {
            return {{"address", hex(h.address)},
                    {"balance", h.balance},
                    {"reentryLimit", h.reentry_limit},
                    {"target", optional_hex(h.target)},
                    {"selector", h.selector ? json(hex(*h.selector)) : json(nullptr)},
                    {"args", h.args}};
        }

        fuzzer::HarnessConfig harness_from(json const &j)
        {
            fuzzer::HarnessConfig h;
            h.address = word_of(j.at("address"));
            h.balance = j.at("balance").get<vm::Word>();
            h.reentry_limit = j.at("reentryLimit").get<std::size_t>();
            h.target = optional_word(j.at("target"));
            if (auto const s = optional_word(j.at("selector"))) {
                h.selector = static_cast<vm::Selector>(*s);
            }
            h.args = j.at("args").get<std::vector<vm::Word>>();
            return h;
        }

        json finding_json(fuzzer::FuzzFinding const &f)
        {
            json txs = json::array();
            for (auto const &tx : f.tx_sequence) {
                txs.push_back(tx_json(tx));
            }
            return {{"category", std::string(oracles::to_string(f.category))},
                    {"contract", f.contract},
                    {"contractAddress", hex(f.contract_address)},
                    {"function", f.function},
                    {"criticalPc", f.critical_pc},
                    {"crossContract", f.cross_contract},
                    {"contractCount", f.contract_count},
                    {"witness",
                     {{"criticalEvent", f.critical_event}, {"relatedEvent", f.related_event}}},
                    {"txSequence", txs},
                    {"harness", harness_json(f.harness)},
                    {"path", f.path},
                    {"queueContract", f.queue_contract},
                    {"queuePosition", f.queue_position},
                    {"contractPosition", f.contract_position},
                    {"attempt", f.attempt},
                    {"t", f.t},
                    {"reentryConfirmed", f.reentry_confirmed}};
        }

        fuzzer::FuzzFinding finding_from(json const &j)
        {
            fuzzer::FuzzFinding f;
            f.category = oracles::category_from_string(j.at("category").get<std::string>());
            f.contract = j.at("contract").get<std::string>();
            f.contract_address = word_of(j.at("contractAddress"));
            f.function = j.at("function").get<std::string>();
            f.critical_pc = j.at("criticalPc").get<std::size_t>();
            f.cross_contract = j.at("crossContract").get<bool>();
            f.contract_count = j.at("contractCount").get<std::size_t>();
            f.critical_event = j.at("witness").at("criticalEvent").get<std::size_t>();
            f.related_event = j.at("witness").at("relatedEvent").get<std::size_t>();
            for (auto const &tx : j.at("txSequence")) {
                f.tx_sequence.push_back(tx_from(tx));
            }
            f.harness = harness_from(j.at("harness"));
            f.path = j.at("path").get<std::string>();
            f.queue_contract = j.at("queueContract").get<std::string>();
            f.queue_position = j.at("queuePosition").get<std::size_t>();
            f.contract_position = j.at("contractPosition").get<std::size_t>();
            f.attempt = j.at("attempt").get<std::uint64_t>();
            f.t = j.at("t").get<double>();
            f.reentry_confirmed = j.at("reentryConfirmed").get<bool>();
            return f;
        }
    }

    std::string config_hash(json const &config)
    {
        return fmt::format("fnv1a64:{:016x}", learner::fnv1a64(config.dump()));
    }

    void sort_findings(std::vector<fuzzer::FuzzFinding> &findings)
    {
        std::stable_sort(findings.begin(), findings.end(),
                         [](fuzzer::FuzzFinding const &a, fuzzer::FuzzFinding const &b) {
                             return std::tie(a.category, a.contract, a.function, a.critical_pc) <
                                    std::tie(b.category, b.contract, b.function, b.critical_pc);
                         });
    }

    json queue_to_json(scheduler::WorkQueue const &queue)
    {
        json out = json::array();
        for (std::size_t i = 0; i < queue.size(); ++i) {
            auto const &p = queue[i];
            json chain = json::array();
            for (auto const &f : p.chain) {
                chain.push_back(ref_json(f));
            }
            json callers = json::array();
            for (auto const &s : p.caller_shapes) {
                callers.push_back(shape_json(s));
            }
            out.push_back({{"position", i},
                           {"target", ref_json(p.target)},
                           {"chain", chain},
                           {"crossContract", p.cross_contract},
                           {"fS", p.scores.f_s},
                           {"sFunc", p.scores.s_func},
                           {"sCaller", p.scores.s_caller},
                           {"targetShape", shape_json(p.target_shape)},
                           {"callerShapes", callers}});
        }
        return out;
    }

    scheduler::WorkQueue queue_from_json(json const &j)
    {
        scheduler::WorkQueue q;
        for (auto const &e : j) {
            scheduler::PrioritizedPath p;
            p.target = ref_from(e.at("target"));
            for (auto const &f : e.at("chain")) {
                p.chain.push_back(ref_from(f));
            }
            p.cross_contract = e.at("crossContract").get<bool>();
            p.scores.f_s = e.at("fS").get<double>();
            p.scores.s_func = e.at("sFunc").get<double>();
            p.scores.s_caller = e.at("sCaller").get<std::uint64_t>();
            p.target_shape = shape_from(e.at("targetShape"));
            for (auto const &s : e.at("callerShapes")) {
                p.caller_shapes.push_back(shape_from(s));
            }
            q.push_back(std::move(p));
        }
        return q;
    }

    std::string serialize_report(ReportDocument const &doc)
    {
        json j;
        j["schema"] = report_schema;
        j["toolVersion"] = doc.tool_version;
        j["configHash"] = doc.config_hash;
        j["config"] = doc.config;
        j["corpus"] = {{"contracts", doc.corpus.contracts}, {"functions", doc.corpus.functions}};
        json contracts = json::array();
        for (auto const &c : doc.contract_predictions) {
            contracts.push_back(
                {{"contract", c.contract}, {"score", c.score}, {"suspicious", c.suspicious}});
        }
        json functions = json::array();
        for (auto const &f : doc.function_predictions) {
            functions.push_back({{"contract", f.contract},
                                 {"function", f.function},
                                 {"scores", f.scores},
                                 {"suspicious", f.suspicious}});
        }
        j["predictions"] = {{"contracts", contracts}, {"functions", functions}};
        j["queue"] = queue_to_json(doc.queue);
        json findings = json::array();
        for (auto const &f : doc.fuzz.findings) {
            findings.push_back(finding_json(f));
        }
        j["findings"] = findings;
        json paths = json::array();
        for (auto const &p : doc.fuzz.paths) {
            paths.push_back({{"chain", p.chain},
                             {"contract", p.contract},
                             {"queuePosition", p.queue_position},
                             {"attempts", p.attempts},
                             {"status", std::string(fuzzer::to_string(p.status))}});
        }
        j["paths"] = paths;
        json timing = json::array();
        for (auto const &c : doc.fuzz.contracts) {
            timing.push_back({{"contract", c.name},
                              {"suspicious", c.suspicious},
                              {"budget", c.budget},
                              {"attempts", c.attempts},
                              {"elapsed", c.elapsed}});
        }
        j["timing"] = {{"unit", std::string(fuzzer::to_string(doc.fuzz.time_unit))},
                       {"totalAttempts", doc.fuzz.total_attempts()},
                       {"contracts", timing}};
        return j.dump(2) + "\n";
    }

    ReportDocument parse_report(std::string const &text)
    {
        try {
            auto const j = json::parse(text);
            if (j.at("schema").get<std::string>() != report_schema) {
                throw ReportError(fmt::format("report schema must be \"{}\"", report_schema));
            }
            ReportDocument doc;
            doc.tool_version = j.at("toolVersion").get<std::string>();
            doc.config_hash = j.at("configHash").get<std::string>();
            doc.config = j.at("config");
            doc.corpus.contracts = j.at("corpus").at("contracts").get<std::vector<std::string>>();
            doc.corpus.functions = j.at("corpus").at("functions").get<std::size_t>();
            for (auto const &c : j.at("predictions").at("contracts")) {
                doc.contract_predictions.push_back({c.at("contract").get<std::string>(),
                                                    c.at("score").get<double>(),
                                                    c.at("suspicious").get<bool>()});
            }
            for (auto const &f : j.at("predictions").at("functions")) {
                doc.function_predictions.push_back(
                    {f.at("contract").get<std::string>(), f.at("function").get<std::string>(),
                     f.at("scores").get<std::map<std::string, double>>(),
                     f.at("suspicious").get<bool>()});
            }
            doc.queue = queue_from_json(j.at("queue"));
            for (auto const &f : j.at("findings")) {
                doc.fuzz.findings.push_back(finding_from(f));
            }
            for (auto const &p : j.at("paths")) {
                doc.fuzz.paths.push_back(
                    {p.at("chain").get<std::string>(), p.at("contract").get<std::string>(),
                     p.at("queuePosition").get<std::size_t>(), p.at("attempts").get<std::uint64_t>(),
                     fuzzer::path_status_from_string(p.at("status").get<std::string>())});
            }
            auto const &timing = j.at("timing");
            doc.fuzz.time_unit = fuzzer::budget_mode_from_string(timing.at("unit").get<std::string>());
            for (auto const &c : timing.at("contracts")) {
                doc.fuzz.contracts.push_back(
                    {c.at("contract").get<std::string>(), c.at("suspicious").get<bool>(),
                     c.at("budget").get<double>(), c.at("attempts").get<std::uint64_t>(),
                     c.at("elapsed").get<double>()});
            }
            return doc;
        }
        catch (ReportError const &) {
            throw;
        }
        catch (std::exception const &e) {
            throw ReportError(fmt::format("invalid report document: {}", e.what()));
        }
    }

    std::string render_text(ReportDocument const &doc)
    {
        std::string out;
        auto const unit = fuzzer::to_string(doc.fuzz.time_unit);
        out += fmt::format("xcfuzz {}  config {}\n", doc.tool_version, doc.config_hash);
        out += fmt::format("corpus: {} contracts, {} functions\n", doc.corpus.contracts.size(),
                           doc.corpus.functions);
        out += fmt::format("attempts: {}  paths queued: {}  findings: {}\n\n",
                           doc.fuzz.total_attempts(), doc.queue.size(), doc.fuzz.findings.size());

        out += "contracts\n";
        for (auto const &c : doc.fuzz.contracts) {
            out += fmt::format("  {:<20} {:<10} budget {:>8} attempts {:>8} elapsed {:.3f} {}\n",
                               c.name, c.suspicious ? "suspicious" : "benign", c.budget,
                               c.attempts, c.elapsed, unit);
        }

        out += "\nfindings\n";
        if (doc.fuzz.findings.empty()) {
            out += "  none\n";
        }
        for (auto const &f : doc.fuzz.findings) {
            out += fmt::format("  {:<12} {}.{} pc={} cross={} contracts={} confirmed={}\n",
                               oracles::to_string(f.category), f.contract, f.function,
                               f.critical_pc, f.cross_contract ? "yes" : "no", f.contract_count,
                               f.reentry_confirmed ? "yes" : "no");
            out += fmt::format("    path: {} (queue {}, contract position {}, t={} {})\n", f.path,
                               f.queue_position, f.contract_position, f.t, unit);
            out += fmt::format("    transactions: {}\n", f.tx_sequence.size());
        }
        return out;
    }
}
