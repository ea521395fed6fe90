#pragma once

#include <xcfuzz/learner/voters.hpp>

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace xcfuzz::learner
{
    class LabelError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    /// One line of a label file:
    ///   {"contract": "Bank", "function": "withdraw", "category": "reentrancy",
    ///    "voterId": "v1-strict", "flag": true}
    struct LabelVote
    {
        std::string contract;
        std::string function;
        VulnCategory category = VulnCategory::Reentrancy;
        std::string voter;
        bool flag = false;

        bool operator==(LabelVote const &) const = default;
    };

    struct LabelRecord
    {
        std::string contract;
        std::string function;
        VulnCategory category = VulnCategory::Reentrancy;
        Votes votes;
        bool label = false; // majority_label(votes, category)

        bool operator==(LabelRecord const &) const = default;
    };

    /// Blank lines are skipped. Throws LabelError naming `source` and the
    /// 1-based line of the first malformed record.
    std::vector<LabelVote> parse_label_lines(std::string const &text, std::string const &source);

    std::string format_label_lines(std::span<LabelVote const> votes);

    /// Groups votes by (contract, function, category), sorted by that key.
    /// A later vote from the same voter replaces an earlier one.
    std::vector<LabelRecord> aggregate_labels(std::span<LabelVote const> votes);

    /// Every built-in voter's verdict for every function and category.
    std::vector<LabelVote> vote_corpus(std::span<vm::ContractPackage const> packages);
}
