#include <doctest.h>

#include "support/fixtures.hpp"
#include "support/programs.hpp"

#include <xcfuzz/analysis/dependency.hpp>
#include <xcfuzz/oracles/detectors.hpp>
#include <xcfuzz/vm/interpreter.hpp>

#include <algorithm>
#include <set>
#include <tuple>

using namespace xcfuzz;
using namespace xcfuzz::oracles;
using testing::attacker_tx;
using testing::fixture_attacker;

namespace
{
    struct Run
    {
        std::vector<vm::ContractPackage> packages;
        vm::ExecutionTrace trace;
        std::vector<Finding> findings;
    };

    Run run_fixture(std::string_view name, vm::TransactionRequest const &tx)
    {
        Run r;
        r.packages = testing::load_fixture(name);
        auto world = testing::fixture_world(r.packages);
        r.trace = vm::execute_transaction(world, tx);
        r.findings = detect_all(r.trace, r.packages);
        return r;
    }

    std::size_t count(std::vector<Finding> const &fs, VulnCategory c)
    {
        return static_cast<std::size_t>(
            std::count_if(fs.begin(), fs.end(), [&](Finding const &f) { return f.category == c; }));
    }

    using Key = std::tuple<VulnCategory, std::size_t, std::size_t>;

    // Direct evaluation of the three predicates over an explicitly closed
    // dependency relation.
    std::set<Key> brute_findings(vm::ExecutionTrace const &trace,
                                 analysis::DependencyGraph const &deps)
    {
        auto const n = trace.events.size();
        std::vector<std::vector<bool>> closed(n, std::vector<bool>(n, false));
        for (std::size_t i = 0; i < n; ++i) {
            for (auto const &e : deps.dependencies(i)) {
                closed[i][e.from] = true;
            }
        }
        // Predecessors always have smaller indices, so one ascending pass
        // closes the relation.
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < i; ++k) {
                if (closed[i][k]) {
                    for (std::size_t j = 0; j < k; ++j) {
                        if (closed[k][j]) {
                            closed[i][j] = true;
                        }
                    }
                }
            }
        }
        auto operand = [](vm::Location const &l) {
            return l.kind == vm::LocationKind::StackValue ||
                   l.kind == vm::LocationKind::MemoryWord ||
                   l.kind == vm::LocationKind::CallReturn;
        };
        // reaches(c, e): e is an operand/guard source of c, or one of those
        // sources depends on e.
        auto reaches = [&](std::size_t c, std::size_t e) {
            for (std::size_t s = 0; s < c; ++s) {
                bool seed = deps.has_edge(s, c, analysis::DepKind::Control);
                for (auto const &w : trace.events[s].writes) {
                    auto const &r = trace.events[c].reads;
                    if (operand(w) && std::find(r.begin(), r.end(), w) != r.end()) {
                        seed = true;
                    }
                }
                if (seed && (s == e || closed[s][e])) {
                    return true;
                }
            }
            return false;
        };
        auto critical = [&](std::size_t i) { return vm::is_critical(trace.events[i].op); };

        std::set<Key> out;
        for (std::size_t c = 0; c < n; ++c) {
            if (!critical(c)) {
                continue;
            }
            for (std::size_t s = c + 1; s < n; ++s) {
                auto const &ss = trace.events[s];
                if (ss.op != vm::Opcode::SSTORE || ss.frame != trace.events[c].frame) {
                    continue;
                }
                for (std::size_t e = 0; e < c; ++e) {
                    bool shared = false;
                    for (auto const &r : trace.events[e].reads) {
                        if (r.kind == vm::LocationKind::StorageSlot &&
                            std::find(ss.writes.begin(), ss.writes.end(), r) != ss.writes.end()) {
                            shared = true;
                        }
                    }
                    if (shared && reaches(c, e)) {
                        out.emplace(VulnCategory::Reentrancy, c, s);
                        break;
                    }
                }
            }
            for (std::size_t o = 0; o < c; ++o) {
                if (trace.events[o].op == vm::Opcode::ORIGIN && reaches(c, o)) {
                    out.emplace(VulnCategory::TxOrigin, c, o);
                    break;
                }
            }
        }
        auto const calldata = vm::Location::env(vm::EnvField::Calldata, 0);
        for (std::size_t d = 0; d < n; ++d) {
            if (trace.events[d].op != vm::Opcode::DELEGATECALL) {
                continue;
            }
            for (std::size_t e = 0; e < d; ++e) {
                auto const &r = trace.events[e].reads;
                if (std::find(r.begin(), r.end(), calldata) != r.end() && reaches(d, e)) {
                    out.emplace(VulnCategory::Delegatecall, d, d);
                    break;
                }
            }
            for (std::size_t c = d + 1; c < n; ++c) {
                if (critical(c) && reaches(c, d)) {
                    out.emplace(VulnCategory::Delegatecall, c, d);
                }
            }
        }
        return out;
    }

    vm::ExecutionTrace truncated(vm::ExecutionTrace const &trace, std::size_t length)
    {
        auto out = trace;
        out.events.resize(length);
        return out;
    }
}

TEST_CASE("category names round-trip")
{
    for (auto c : all_categories) {
        CHECK(category_from_string(to_string(c)) == c);
    }
    CHECK(to_string(VulnCategory::TxOrigin) == "tx-origin");
    CHECK_THROWS_AS(category_from_string("overflow"), std::invalid_argument);
}

TEST_CASE("reentrancy: bank is flagged, checks-effects variant is not")
{
    auto const bank = run_fixture("bank", attacker_tx(0xB001, 0x5fd8c710));
    REQUIRE(bank.trace.outcome == vm::Outcome::Halted);
    REQUIRE(bank.findings.size() == 1);
    auto const &f = bank.findings[0];
    CHECK(f.category == VulnCategory::Reentrancy);
    CHECK(f.contract == 0xB001);
    CHECK(f.function == "withdrawBalance");
    CHECK(bank.trace.events[f.critical_event].op == vm::Opcode::CALL);
    CHECK(bank.trace.events[f.related_event].op == vm::Opcode::SSTORE);
    CHECK_FALSE(f.cross_contract);
    CHECK(f.contract_addrs == std::set<vm::Address>{0xB001});

    auto const safe = run_fixture("safebank", attacker_tx(0xB002, 0x5fd8c710));
    REQUIRE(safe.trace.outcome == vm::Outcome::Halted);
    CHECK(safe.findings.empty());

    auto const deposit = run_fixture("bank", attacker_tx(0xB001, 0xd0e30db0, {}, 5));
    CHECK(deposit.findings.empty());
}

TEST_CASE("reentrancy: removing op_s removes the finding")
{
    auto const bank = run_fixture("bank", attacker_tx(0xB001, 0x5fd8c710));
    REQUIRE(bank.findings.size() == 1);
    auto const cut = truncated(bank.trace, bank.findings[0].related_event);
    CHECK(count(detect_all(cut, bank.packages), VulnCategory::Reentrancy) == 0);
}

TEST_CASE("delegatecall: forwarded call-data is flagged, constant delegation is not")
{
    auto const run = run_fixture("delegation", attacker_tx(0xD001, 0xdd365b8b));
    REQUIRE(run.trace.outcome == vm::Outcome::Halted);
    REQUIRE(count(run.findings, VulnCategory::Delegatecall) == 1);
    CHECK(run.findings.size() == 1);
    auto const &f = run.findings[0];
    CHECK(run.trace.events[f.critical_event].op == vm::Opcode::DELEGATECALL);
    CHECK(f.critical_event == f.related_event);
    CHECK(f.function == "fallback");

    auto const fixed = testing::make_package(
        "Fixed", 0xE001,
        "main: JUMPDEST / PUSH 0xdd365b8b / PUSH 0 / MSTORE / PUSH 0 / PUSH 0 / PUSH 8 / "
        "PUSH 0 / PUSH 0xd002 / PUSH 0 / DELEGATECALL / POP / STOP",
        {{"main", std::nullopt, "main", {}, true, true}});
    auto pkgs = testing::load_fixture("delegation");
    pkgs.push_back(fixed);
    auto world = testing::fixture_world(pkgs);
    auto const trace = vm::execute_transaction(world, attacker_tx(0xE001, std::nullopt, {7, 8}));
    REQUIRE(trace.outcome == vm::Outcome::Halted);
    CHECK(std::any_of(trace.events.begin(), trace.events.end(),
                      [](auto const &e) { return e.op == vm::Opcode::DELEGATECALL; }));
    CHECK(detect_all(trace, pkgs).empty());
}

TEST_CASE("delegatecall: a critical op depending on a DELEGATECALL result")
{
    auto const user = testing::make_package(
        "User", 0xE002,
        "main: JUMPDEST / PUSH 0xdd365b8b / PUSH 0 / MSTORE\n"
        "PUSH 0 / PUSH 0 / PUSH 8 / PUSH 0 / PUSH 0xd002 / PUSH 0 / DELEGATECALL\n"
        "JUMPI @go / STOP\n"
        "go: JUMPDEST / PUSH 0 / PUSH 0 / PUSH 0 / PUSH 0 / PUSH 0 / PUSH 0xa77a / PUSH 0 / CALL / "
        "POP / STOP",
        {{"main", std::nullopt, "main", {}, true, true}});
    auto pkgs = testing::load_fixture("delegation");
    pkgs.push_back(user);
    auto world = testing::fixture_world(pkgs);
    auto const trace = vm::execute_transaction(world, attacker_tx(0xE002, std::nullopt));
    auto const findings = detect_all(trace, pkgs);
    REQUIRE(findings.size() == 1);
    CHECK(findings[0].category == VulnCategory::Delegatecall);
    CHECK(trace.events[findings[0].critical_event].op == vm::Opcode::CALL);
    CHECK(trace.events[findings[0].related_event].op == vm::Opcode::DELEGATECALL);
}

TEST_CASE("tx-origin: ORIGIN guard is flagged, CALLER guard and discarded ORIGIN are not")
{
    auto const guarded = run_fixture("txorigin", attacker_tx(0xC001, 0x2ccb1b30, {0xA77A}));
    REQUIRE(guarded.trace.outcome == vm::Outcome::Halted);
    REQUIRE(guarded.findings.size() == 1);
    CHECK(guarded.findings[0].category == VulnCategory::TxOrigin);
    CHECK(guarded.trace.events[guarded.findings[0].related_event].op == vm::Opcode::ORIGIN);

    auto const checked = run_fixture("txorigin", attacker_tx(0xC001, 0x6b8ff574, {0xA77A}));
    REQUIRE(checked.trace.outcome == vm::Outcome::Halted);
    CHECK(checked.findings.empty());

    auto const ping = run_fixture("txorigin", attacker_tx(0xC001, 0x5c36b186));
    REQUIRE(ping.trace.outcome == vm::Outcome::Halted);
    CHECK(ping.findings.empty());
}

TEST_CASE("cross-contract: logging chain spans three contracts")
{
    auto const run = run_fixture("logchain", attacker_tx(0xF001, 0x51e5b4b2));
    REQUIRE(run.trace.outcome == vm::Outcome::Halted);
    REQUIRE_FALSE(run.findings.empty());
    for (auto const &f : run.findings) {
        CHECK(f.category == VulnCategory::Reentrancy);
        CHECK(f.contract == 0xF003);
        CHECK(f.function == "withdraw");
        CHECK(f.cross_contract);
        CHECK(f.contract_addrs.size() == 3);
    }
    // The fallback re-entered, so withdraw ran in two activations.
    CHECK(run.findings.size() == 2);
}

TEST_CASE("cross-contract flag counts executing code owners")
{
    vm::ExecutionTrace trace;
    trace.touched_contracts = {0xA, 0xB, 0xC};
    CHECK(classify_cross_contract({}, trace).cross_contract);
    trace.touched_contracts = {0xA, 0xB};
    auto const two = classify_cross_contract({}, trace);
    CHECK_FALSE(two.cross_contract);
    CHECK(two.contract_addrs.size() == 2);
}

TEST_CASE("detectors equal direct predicate evaluation on random traces")
{
    testing::TestRng rng(23);
    std::size_t total = 0;
    std::size_t skipped = 0;
    std::set<VulnCategory> seen;
    for (int round = 0; round < 300; ++round) {
        testing::RandomWorldOptions opts;
        opts.tainted = true;
        opts.snippets = 5;
        auto const pkgs = testing::random_contracts(rng, opts);
        auto world = testing::world_with_sender(pkgs);
        auto const trace = vm::execute_transaction(world, testing::random_tx(rng, pkgs));
        if (trace.events.size() > 200) {
            ++skipped;
            continue;
        }
        auto const deps = analysis::trace_dependencies(trace, pkgs);
        auto const findings = detect_all(trace, deps);
        std::set<Key> got;
        DependencyView const view(trace, deps);
        for (auto const &f : findings) {
            got.emplace(f.category, f.critical_event, f.related_event);
            CHECK(witness_holds(f, view));
            CHECK(f.cross_contract == (trace.touched_contracts.size() > 2));
            seen.insert(f.category);
        }
        CHECK(got.size() == findings.size());
        CHECK(got == brute_findings(trace, deps));
        total += findings.size();

        for (auto const &f : findings) {
            if (f.category != VulnCategory::Reentrancy) {
                continue;
            }
            auto const cut = truncated(trace, f.related_event);
            for (auto const &g : detect_all(cut, pkgs)) {
                CHECK_FALSE((g.category == f.category && g.related_event == f.related_event));
            }
        }
    }
    CHECK(total > 0);
    CHECK(seen.size() == all_categories.size());
    MESSAGE("findings on random traces: ", total, ", skipped long traces: ", skipped);
}
