#pragma once

#include <xcfuzz/fuzzer/harness.hpp>
#include <xcfuzz/fuzzer/mutate.hpp>
#include <xcfuzz/oracles/detectors.hpp>
#include <xcfuzz/scheduler/priority.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace xcfuzz::fuzzer
{
    enum class BudgetMode : std::uint8_t
    {
        Seconds,  // wall-clock seconds per contract
        Attempts, // rounds per contract; every runnable path gets one batch per round
    };

    std::string_view to_string(BudgetMode mode);
    BudgetMode budget_mode_from_string(std::string_view text);

    inline constexpr std::size_t default_mutations_per_round = 50;
    inline constexpr std::uint64_t default_fuzz_step_budget = 10'000;

    struct Budget
    {
        double vulnerable = 180.0;
        double benign = 30.0; // 0 skips benign contracts entirely
        BudgetMode mode = BudgetMode::Seconds;
        std::uint64_t step_budget = default_fuzz_step_budget; // per transaction

        bool operator==(Budget const &) const = default;
    };

    struct CampaignConfig
    {
        Budget budget;
        std::uint64_t seed = 0;
        std::size_t workers = 1;
        std::size_t mutations_per_round = default_mutations_per_round;
        vm::Address attacker = default_attacker;
        vm::Word attacker_balance = default_attacker_balance;
        std::size_t reentry_limit = 1;

        bool operator==(CampaignConfig const &) const = default;
    };

    struct Campaign
    {
        std::vector<vm::ContractPackage> packages;
        scheduler::WorkQueue queue;
        // Contract name -> predicted suspicious. Missing means benign.
        std::map<std::string, bool> suspicious_contracts;
        CampaignConfig config;
    };

    struct FuzzFinding
    {
        oracles::VulnCategory category = oracles::VulnCategory::Reentrancy;
        std::string contract; // code owner executing op_c
        vm::Address contract_address = 0;
        std::string function;
        std::size_t critical_pc = 0;
        bool cross_contract = false;
        std::size_t contract_count = 0;
        vm::EventIndex critical_event = 0;
        vm::EventIndex related_event = 0;
        // Init calls then the chain entry call; replayed on a fresh world
        // with the harness installed.
        std::vector<vm::TransactionRequest> tx_sequence;
        HarnessConfig harness;
        std::string path;                // chain string of the fuzzed path
        std::string queue_contract;      // contract whose budget found it
        std::size_t queue_position = 0;  // in the whole queue
        std::size_t contract_position = 0; // among the queue_contract's paths
        std::uint64_t attempt = 0;       // 1-based within queue_contract
        double t = 0.0;                  // attempts or seconds, per the budget mode
        bool reentry_confirmed = false;

        bool operator==(FuzzFinding const &) const = default;
    };

    enum class PathStatus : std::uint8_t
    {
        Fuzzed,
        Skipped,        // the contract's budget was zero
        EntryNotPublic, // the chain head cannot be called by a transaction
    };

    std::string_view to_string(PathStatus s);
    PathStatus path_status_from_string(std::string_view text);

    struct PathRecord
    {
        std::string chain;
        std::string contract;
        std::size_t queue_position = 0;
        std::uint64_t attempts = 0;
        PathStatus status = PathStatus::Fuzzed;

        bool operator==(PathRecord const &) const = default;
    };

    struct ContractRecord
    {
        std::string name;
        bool suspicious = false;
        double budget = 0.0;
        std::uint64_t attempts = 0;
        double elapsed = 0.0; // attempts or seconds, per the budget mode

        bool operator==(ContractRecord const &) const = default;
    };

    struct FuzzReport
    {
        BudgetMode time_unit = BudgetMode::Attempts;
        // Deduplicated by (category, contract, function, op_c pc); ordered by
        // contract processing order, then discovery.
        std::vector<FuzzFinding> findings;
        std::vector<PathRecord> paths;         // queue order
        std::vector<ContractRecord> contracts; // processing order

        std::uint64_t total_attempts() const;

        bool operator==(FuzzReport const &) const = default;
    };

    /// Contracts are processed in order of their first queue appearance;
    /// within a contract, round-robin over its paths in queue order. An
    /// entry call that runs out of steps is an attempt without oracle
    /// evaluation: its trace is incomplete and every effect is undone. In
    /// attempts mode the result does not depend on the worker count.
    FuzzReport run_campaign(Campaign const &campaign);

    struct ReplayOutcome
    {
        bool retriggered = false;
        vm::ExecutionTrace trace; // of the last transaction
        std::vector<oracles::Finding> findings;
    };

    /// Replays the finding's transactions on a fresh world and checks that
    /// the same oracle fires at the same site.
    ReplayOutcome replay(std::vector<vm::ContractPackage> const &packages,
                         FuzzFinding const &finding);
}
