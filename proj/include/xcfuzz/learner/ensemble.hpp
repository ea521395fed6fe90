#pragma once

#include <xcfuzz/learner/embedding.hpp>
#include <xcfuzz/learner/feature_vector.hpp>
#include <xcfuzz/learner/labels.hpp>
#include <xcfuzz/learner/tree.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace xcfuzz::learner
{
    inline constexpr std::string_view model_schema = "xcfuzz-model/1";

    enum class ModelKind : std::uint8_t
    {
        EEC,          // bags of boosted shallow trees on balanced resamples
        DecisionTree, // one CART tree
    };

    std::string_view to_string(ModelKind k);
    ModelKind model_kind_from_string(std::string_view text);

    struct EnsembleParams
    {
        std::size_t bags = 10;
        std::size_t rounds = 10;
        std::size_t bag_depth = 3;
        std::size_t tree_depth = 8;
        double threshold = 0.5;

        bool operator==(EnsembleParams const &) const = default;
    };

    /// SAMME boosting committee (two classes).
    struct Committee
    {
        std::vector<DecisionTree> trees;
        std::vector<double> alphas;
        // Class counts of the bag the committee was trained on.
        std::size_t positives = 0;
        std::size_t negatives = 0;

        /// Alpha-weighted fraction of trees voting positive.
        double score(std::span<double const> x) const;

        bool operator==(Committee const &) const = default;
    };

    struct TrainingSet
    {
        std::vector<FeatureVector> x;
        Labels y;
    };

    struct EnsembleModel
    {
        ModelKind kind = ModelKind::EEC;
        oracles::VulnCategory category = oracles::VulnCategory::Reentrancy;
        EnsembleParams params;
        std::uint64_t seed = 0;
        std::vector<Committee> bags; // EEC
        DecisionTree tree;           // DecisionTree
        // Token vectors used to featurize functions at prediction time.
        Embedding embedding;

        /// Mean bag score (EEC) or leaf positive fraction (DT). Throws
        /// std::invalid_argument unless fv has feature_dims components.
        double score(std::span<double const> fv) const;

        bool operator==(EnsembleModel const &) const = default;
    };

    struct Prediction
    {
        double score = 0.0;
        bool suspicious = false; // score >= threshold
    };

    Prediction predict(EnsembleModel const &model, std::span<double const> fv);
    Prediction predict(EnsembleModel const &model, FunctionSample const &sample);

    /// Collapses identical (vector, label) pairs, keeping first occurrences.
    TrainingSet deduplicate(TrainingSet const &data);

    Committee fit_adaboost(std::span<FeatureVector const> x, Labels const &y, std::size_t rounds,
                           std::size_t depth);

    /// Throws std::invalid_argument unless both classes are present and
    /// every vector has feature_dims components. The embedding is left
    /// empty; train_category_model fills it.
    EnsembleModel train_classifier(TrainingSet const &data, ModelKind kind, std::uint64_t seed,
                                   EnsembleParams const &params = {});

    /// Embeds the samples' tokens, labels each sample from `labels`
    /// (missing records count as negative), deduplicates, trains.
    EnsembleModel train_category_model(std::span<FunctionSample const> samples,
                                       std::span<LabelRecord const> labels,
                                       oracles::VulnCategory category, std::uint64_t seed,
                                       ModelKind kind = ModelKind::EEC,
                                       EnsembleParams const &params = {});
}
