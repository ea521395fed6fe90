#pragma once

#include <xcfuzz/cli/report.hpp>
#include <xcfuzz/learner/ensemble.hpp>

#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace xcfuzz::cli
{
    inline constexpr std::string_view predictions_schema = "xcfuzz-predictions/1";
    inline constexpr std::string_view queue_schema = "xcfuzz-queue/1";

    struct LoadedModel
    {
        learner::EnsembleModel model;
        std::string hash; // config_hash-style digest of the serialized model
    };

    /// "fnv1a64:" and 16 hex digits over serialize_model(model).
    std::string model_hash(learner::EnsembleModel const &model);

    /// Digest of every package field that influences analysis or execution.
    std::string corpus_hash(std::span<vm::ContractPackage const> packages);

    LoadedModel load_model(std::filesystem::path const &file);

    /// Every *.json file of `dir`, in file-name order. Throws
    /// std::runtime_error if there is none.
    std::vector<LoadedModel> load_model_dir(std::filesystem::path const &dir);

    struct CorpusPredictions
    {
        std::vector<ContractPrediction> contracts;  // package order
        std::vector<FunctionPrediction> functions;  // package then manifest order
        scheduler::SuspicionMap suspicious_functions;
        std::map<std::string, bool> suspicious_contracts;
    };

    /// A function is suspicious when any model flags it; a contract when
    /// any of its functions is.
    CorpusPredictions predict_corpus(std::span<vm::ContractPackage const> packages,
                                     std::span<LoadedModel const> models);

    std::string predictions_document(CorpusPredictions const &preds,
                                     std::span<LoadedModel const> models);

    enum class FuzzMode : std::uint8_t
    {
        Guided,  // model suspicion drives f_s and the per-contract budget
        Uniform, // no model input: f_s = 1 everywhere, every contract gets t_h
    };

    std::string_view to_string(FuzzMode m);
    FuzzMode fuzz_mode_from_string(std::string_view text);

    struct FuzzOptions
    {
        FuzzMode mode = FuzzMode::Guided;
        fuzzer::CampaignConfig campaign;
        std::size_t max_depth = scheduler::default_max_depth;
    };

    /// Canonical configuration object hashed into the report.
    nlohmann::json fuzz_config_json(FuzzOptions const &options,
                                    std::span<LoadedModel const> models,
                                    std::string const &corpus_digest);

    /// Predicts, builds the queue, runs the campaign and assembles the
    /// report with findings in sort_findings order. Throws
    /// std::invalid_argument for guided mode without models.
    ReportDocument fuzz_corpus(std::vector<vm::ContractPackage> const &packages,
                               std::span<LoadedModel const> models, FuzzOptions const &options);

    /// Sets the default logger to stderr at the level named by XCFUZZ_LOG
    /// (trace, debug, info, warn, error, critical, off; default info).
    void configure_logging();

    /// Runs one subcommand. Exit status: 0 success, 1 runtime failure,
    /// 2 usage error (usage text goes to `err`).
    int run_cli(std::vector<std::string> const &args, std::ostream &out, std::ostream &err);
}
