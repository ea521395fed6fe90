#pragma once

#include <xcfuzz/fuzzer/campaign.hpp>
#include <xcfuzz/scheduler/priority.hpp>

#include <json.hpp>

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace xcfuzz::cli
{
    inline constexpr std::string_view report_schema = "xcfuzz-report/1";
    inline constexpr std::string_view tool_version = "0.1.0";

    class ReportError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    struct FunctionPrediction
    {
        std::string contract;
        std::string function;
        std::map<std::string, double> scores; // category name -> model score
        bool suspicious = false;              // any category model flags it

        bool operator==(FunctionPrediction const &) const = default;
    };

    struct ContractPrediction
    {
        std::string contract;
        double score = 0.0; // highest function score
        bool suspicious = false;

        bool operator==(ContractPrediction const &) const = default;
    };

    struct CorpusSummary
    {
        std::vector<std::string> contracts;
        std::size_t functions = 0;

        bool operator==(CorpusSummary const &) const = default;
    };

    // Report document:
    //   {"schema", "toolVersion", "configHash", "config",
    //    "corpus": {"contracts": [names], "functions": n},
    //    "predictions": {"contracts": [...], "functions": [...]},
    //    "queue": [path, ...],
    //    "findings": [finding, ...],    sorted by (category, contract, function, pc)
    //    "paths": [...], "timing": {"unit", "totalAttempts", "contracts": [...]}}
    struct ReportDocument
    {
        std::string tool_version{cli::tool_version};
        std::string config_hash;
        nlohmann::json config = nlohmann::json::object();
        CorpusSummary corpus;
        std::vector<ContractPrediction> contract_predictions;
        std::vector<FunctionPrediction> function_predictions;
        scheduler::WorkQueue queue;
        fuzzer::FuzzReport fuzz;

        bool operator==(ReportDocument const &) const = default;
    };

    /// "fnv1a64:" and 16 hex digits over the canonical (key-sorted, compact)
    /// rendering of `config`.
    std::string config_hash(nlohmann::json const &config);

    /// Stable order: (category, contract, function, op_c pc).
    void sort_findings(std::vector<fuzzer::FuzzFinding> &findings);

    nlohmann::json queue_to_json(scheduler::WorkQueue const &queue);
    scheduler::WorkQueue queue_from_json(nlohmann::json const &j);

    std::string serialize_report(ReportDocument const &doc);

    /// Throws ReportError on malformed input or a schema mismatch.
    ReportDocument parse_report(std::string const &text);

    std::string render_text(ReportDocument const &doc);
}
