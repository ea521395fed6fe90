#pragma once

#include <xcfuzz/learner/ensemble.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>

namespace xcfuzz::learner
{
    class ModelError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // Model document:
    //   {"schema": "xcfuzz-model/1", "kind": "eec", "category": "reentrancy",
    //    "seed": 7, "threshold": 0.5,
    //    "hyperparams": {"bags", "rounds", "bagDepth", "treeDepth",
    //                    "embedding": {"dims", "window", "negatives", "epochs",
    //                                  "learningRate", "seed"}},
    //    "embedding": {"ADD": [20 reals], ...},
    //    "bags": [{"positives", "negatives", "alphas": [...],
    //              "trees": [tree, ...]}],
    //    "tree": tree or null}
    // tree = {"tiePositive": bool, "root": node};
    // node = {"value": v} for a leaf, otherwise
    //        {"value": v, "feature": f, "threshold": t, "left": node, "right": node}

    /// Stable text: equal models serialize to equal bytes.
    std::string serialize_model(EnsembleModel const &model);

    /// Throws ModelError on a malformed document or schema mismatch.
    EnsembleModel parse_model(std::string const &text);
}
