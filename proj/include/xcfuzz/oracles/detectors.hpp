#pragma once

#include <xcfuzz/analysis/dependency.hpp>
#include <xcfuzz/vm/trace.hpp>
#include <xcfuzz/vm/world.hpp>

#include <array>
#include <compare>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace xcfuzz::oracles
{
    enum class VulnCategory : std::uint8_t
    {
        Reentrancy,
        Delegatecall,
        TxOrigin,
    };

    inline constexpr std::array<VulnCategory, 3> all_categories{
        VulnCategory::Reentrancy, VulnCategory::Delegatecall, VulnCategory::TxOrigin};

    std::string_view to_string(VulnCategory c);

    /// Accepts the names produced by to_string ("reentrancy", "delegatecall",
    /// "tx-origin"). Throws std::invalid_argument otherwise.
    VulnCategory category_from_string(std::string_view text);

    struct Finding
    {
        VulnCategory category = VulnCategory::Reentrancy;
        // op_c: the critical call event.
        vm::EventIndex critical_event = 0;
        // Reentrancy: the later SSTORE. Delegatecall: the DELEGATECALL.
        // TxOrigin: the ORIGIN event.
        vm::EventIndex related_event = 0;
        std::size_t critical_pc = 0;
        // Code owner and function of the activation executing op_c.
        vm::Address contract = 0;
        std::string function;
        // Code owners that executed anywhere in the witness trace.
        std::set<vm::Address> contract_addrs;
        bool cross_contract = false;

        auto operator<=>(Finding const &) const = default;
    };

    /// Backward dependency queries restricted to what an event consumes as
    /// operands (stack values, memory words, call results) plus the
    /// conditions it is control-dependent on. Environment inputs an event
    /// reads for bookkeeping, such as a call's own caller and value, are
    /// not seeds.
    class DependencyView
    {
    public:
        DependencyView(vm::ExecutionTrace const &trace, analysis::DependencyGraph const &deps);

        vm::ExecutionTrace const &trace() const
        {
            return *trace_;
        }

        analysis::DependencyGraph const &graph() const
        {
            return *deps_;
        }

        /// Direct operand and guard sources of `event`.
        std::vector<vm::EventIndex> seeds(vm::EventIndex event) const;

        /// Events reachable backwards from the seeds of `event` (seeds
        /// included). Cached.
        std::vector<bool> const &operand_closure(vm::EventIndex event) const;

    private:
        vm::ExecutionTrace const *trace_;
        analysis::DependencyGraph const *deps_;
        std::map<vm::Location, std::vector<vm::EventIndex>> writers_;
        mutable std::map<vm::EventIndex, std::vector<bool>> cache_;
    };

    /// op_c in the critical set whose operands or guard transitively read a
    /// storage slot that a later SSTORE of the same activation writes.
    std::vector<Finding> detect_reentrancy(DependencyView const &view);

    /// A DELEGATECALL whose target or payload derives from the transaction
    /// call-data, or a later critical op depending on a DELEGATECALL.
    std::vector<Finding> detect_delegatecall(DependencyView const &view);

    /// A critical op whose operands or guard depend on an ORIGIN event.
    std::vector<Finding> detect_tx_origin(DependencyView const &view);

    std::vector<Finding> detect_reentrancy(vm::ExecutionTrace const &trace,
                                           analysis::DependencyGraph const &deps);
    std::vector<Finding> detect_delegatecall(vm::ExecutionTrace const &trace,
                                             analysis::DependencyGraph const &deps);
    std::vector<Finding> detect_tx_origin(vm::ExecutionTrace const &trace,
                                          analysis::DependencyGraph const &deps);

    /// Sets contract_addrs from the trace's executing code owners;
    /// cross_contract holds when there are more than two.
    Finding classify_cross_contract(Finding finding, vm::ExecutionTrace const &trace);

    /// Re-evaluates the category predicate on the witness indices.
    bool witness_holds(Finding const &finding, DependencyView const &view);

    /// All three detectors in category order, classified.
    std::vector<Finding> detect_all(vm::ExecutionTrace const &trace,
                                    analysis::DependencyGraph const &deps);

    /// Builds data and dynamic control dependencies, then detect_all.
    std::vector<Finding> detect_all(vm::ExecutionTrace const &trace,
                                    std::span<vm::ContractPackage const> packages);
}
