#include <doctest.h>

#include "support/brute.hpp"
#include "support/fixtures.hpp"
#include "support/programs.hpp"

#include <xcfuzz/analysis/callgraph.hpp>
#include <xcfuzz/analysis/cfg.hpp>
#include <xcfuzz/analysis/dependency.hpp>
#include <xcfuzz/analysis/dot.hpp>
#include <xcfuzz/analysis/features.hpp>
#include <xcfuzz/analysis/function.hpp>
#include <xcfuzz/analysis/postdom.hpp>
#include <xcfuzz/vm/assembler.hpp>
#include <xcfuzz/vm/interpreter.hpp>

#include <algorithm>

using namespace xcfuzz;
using namespace xcfuzz::analysis;
using testing::TestRng;

namespace
{
    std::size_t find_event(vm::ExecutionTrace const &t, vm::Opcode op, std::size_t nth = 0)
    {
        for (auto const &ev : t.events) {
            if (ev.op == op && nth-- == 0) {
                return ev.index;
            }
        }
        FAIL("event not found");
        return 0;
    }

    vm::ExecutionTrace run_single(std::string_view source)
    {
        auto pkg = testing::make_package("P", 0xA, source, {{"main", std::nullopt, "main", {}, true, true}});
        auto world = testing::world_with_sender({pkg});
        vm::TransactionRequest tx;
        tx.caller = tx.origin = testing::sender_address;
        tx.target = 0xA;
        return vm::execute_transaction(world, tx);
    }

    Cfg graph(std::size_t n, std::vector<std::pair<BlockId, BlockId>> edges,
              std::vector<BlockId> exits)
    {
        return Cfg::from_graph(n, edges, 0, exits);
    }
}

TEST_CASE("cfg: straight line is one block plus the virtual exit")
{
    auto const code = vm::assemble("PUSH1 1 / POP / STOP");
    auto const cfg = Cfg::build(code, 0);
    CHECK(cfg.size() == 2);
    CHECK(cfg.successors(0) == std::vector<BlockId>{cfg.exit()});
    CHECK(cfg.block(0).terminator == Terminator::Halt);
    CHECK(cfg.instructions(0).size() == 3);
    CHECK(cfg.block(cfg.exit()).terminator == Terminator::Exit);
}

TEST_CASE("cfg: constant JUMPI forks into taken and fall-through blocks")
{
    auto const code = vm::assemble("PUSH 1 / JUMPI @t / STOP / t: JUMPDEST / STOP");
    auto const cfg = Cfg::build(code, 0);
    REQUIRE(cfg.size() == 4);
    CHECK(cfg.block(0).terminator == Terminator::JumpI);
    CHECK(cfg.successors(0).size() == 2);
    auto const taken = cfg.block_at(code.size() - 2);
    REQUIRE(taken.has_value());
    CHECK(std::count(cfg.successors(0).begin(), cfg.successors(0).end(), *taken) == 1);
    CHECK(cfg.block(0).jump_target == code.size() - 2);
}

TEST_CASE("cfg: decoding errors")
{
    std::vector<std::uint8_t> const bad{0x60, 0x01, 0xFE};
    CHECK_THROWS_AS(Cfg::build(bad, 0), vm::DecodeError);
    std::vector<std::uint8_t> const truncated{0x61, 0x01};
    CHECK_THROWS_AS(Cfg::build(truncated, 0), vm::DecodeError);
    auto const ok = vm::assemble("PUSH1 1 / STOP");
    CHECK_THROWS_AS(Cfg::build(ok, 1), std::invalid_argument);
}

TEST_CASE("cfg: dynamic jump exits and an infinite loop is flagged")
{
    auto const dyn = Cfg::build(vm::assemble("PUSH 0 / CALLDATALOAD / JUMP"), 0);
    CHECK(dyn.block(0).dynamic_jump);
    CHECK(dyn.successors(0) == std::vector<BlockId>{dyn.exit()});

    auto const loop = Cfg::build(vm::assemble("l: JUMPDEST / JUMP @l"), 0);
    CHECK(loop.has_no_exit_blocks());
    CHECK(loop.block(0).no_exit);
    PostDomTree const pdom(loop);
    CHECK_FALSE(pdom.ipdom(0).has_value());
    CHECK(control_dependencies(loop, pdom).edge_count() == 0);
}

TEST_CASE("cfg: block spans partition the reachable instructions")
{
    TestRng rng(7);
    for (int round = 0; round < 50; ++round) {
        auto const pkgs = testing::random_contracts(rng, {1, 6, true, true});
        for (auto const &fn : pkgs[0].functions) {
            FunctionAnalysis const fa(pkgs[0], fn);
            std::vector<std::size_t> pcs;
            for (BlockId b = 0; b < fa.cfg().size(); ++b) {
                for (auto const &ins : fa.cfg().instructions(b)) {
                    pcs.push_back(ins.pc);
                }
            }
            auto sorted = pcs;
            std::sort(sorted.begin(), sorted.end());
            CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
            std::vector<std::size_t> reachable;
            for (auto const &ins : fa.reachable_instructions()) {
                reachable.push_back(ins.pc);
            }
            CHECK(sorted == reachable);
        }
    }
}

TEST_CASE("postdom: diamond and straight line")
{
    auto const diamond = graph(4, {{0, 1}, {0, 2}, {1, 3}, {2, 3}}, {3});
    PostDomTree const pd(diamond);
    CHECK(pd.ipdom(0) == 3);
    CHECK(pd.ipdom(1) == 3);
    CHECK(pd.ipdom(2) == 3);
    CHECK(pd.ipdom(3) == diamond.exit());
    CHECK(pd.root() == diamond.exit());
    CHECK(pd.postdominates(3, 0));
    CHECK_FALSE(pd.postdominates(1, 0));
    for (BlockId b = 0; b < diamond.size(); ++b) {
        CHECK(pd.postdominates(b, b));
    }

    auto const line = graph(3, {{0, 1}, {1, 2}}, {2});
    PostDomTree const pl(line);
    CHECK(pl.ipdom(0) == 1);
    CHECK(pl.ipdom(1) == 2);
}

TEST_CASE("postdom: tree ancestry equals definitional post-dominance")
{
    TestRng rng(11);
    for (int round = 0; round < 200; ++round) {
        auto const g = testing::random_graph(rng, 12);
        auto const cfg = testing::to_cfg(g);
        PostDomTree const pd(cfg);
        for (BlockId b = 0; b < cfg.size(); ++b) {
            REQUIRE(pd.in_tree(b));
            for (BlockId a = 0; a < cfg.size(); ++a) {
                CHECK_MESSAGE(pd.postdominates(a, b) == testing::brute_postdominates(cfg, a, b),
                              "round ", round, " a=", a, " b=", b);
            }
        }
    }
}

TEST_CASE("control dependency: diamond, straight line and loop guard")
{
    auto const diamond = graph(4, {{0, 1}, {0, 2}, {1, 3}, {2, 3}}, {3});
    auto const cd = control_dependencies(diamond, PostDomTree(diamond));
    CHECK(cd.has_edge(0, 1, DepKind::Control));
    CHECK(cd.has_edge(0, 2, DepKind::Control));
    CHECK(cd.dependencies(3).empty());
    CHECK(cd.dependencies(0).empty());

    auto const line = graph(3, {{0, 1}, {1, 2}}, {2});
    CHECK(control_dependencies(line, PostDomTree(line)).edge_count() == 0);

    // 0 -> guard 1 -> body 2 -> guard 1; guard 1 -> 3 -> exit
    auto const loop = graph(4, {{0, 1}, {1, 2}, {2, 1}, {1, 3}}, {3});
    auto const lcd = control_dependencies(loop, PostDomTree(loop));
    CHECK(lcd.has_edge(1, 2, DepKind::Control));
    CHECK(lcd.has_edge(1, 1, DepKind::Control));
    CHECK(lcd.dependencies(3).empty());
}

TEST_CASE("control dependency: equals brute-force evaluation on random graphs")
{
    TestRng rng(13);
    for (int round = 0; round < 200; ++round) {
        auto const g = testing::random_graph(rng, 12);
        auto const cfg = testing::to_cfg(g);
        auto const cd = control_dependencies(cfg, PostDomTree(cfg));
        for (BlockId x = 0; x < cfg.size(); ++x) {
            for (BlockId y = 0; y < cfg.size(); ++y) {
                CHECK_MESSAGE(cd.has_edge(x, y, DepKind::Control) ==
                                  testing::brute_control_dependent(cfg, y, x),
                              "round ", round, " x=", x, " y=", y);
            }
        }
    }
}

TEST_CASE("data dependency: storage, distinct slots and stack values")
{
    auto const t = run_single("main: JUMPDEST / PUSH 5 / PUSH 1 / SSTORE / PUSH 1 / SLOAD / "
                              "PUSH 2 / SLOAD / ADD / POP / STOP");
    auto const deps = data_dependencies(t);
    auto const store = find_event(t, vm::Opcode::SSTORE);
    auto const load1 = find_event(t, vm::Opcode::SLOAD, 0);
    auto const load2 = find_event(t, vm::Opcode::SLOAD, 1);
    auto const add = find_event(t, vm::Opcode::ADD);
    CHECK(deps.has_edge(store, load1, DepKind::Data));
    CHECK_FALSE(deps.has_edge(store, load2));
    CHECK(deps.has_edge(load1, add, DepKind::Data));
    CHECK(deps.has_edge(load2, add, DepKind::Data));

    auto const push = find_event(t, vm::Opcode::PUSH1, 0);
    CHECK(deps.has_edge(push, store, DepKind::Data));
    // Transitive: ADD reaches the first PUSH through SSTORE and SLOAD.
    CHECK(deps.depends_on(add, push));
    CHECK_FALSE(deps.depends_on(push, add));
}

TEST_CASE("data dependency: equals pairwise evaluation on random traces")
{
    TestRng rng(17);
    for (int round = 0; round < 150; ++round) {
        auto const trace = testing::random_location_trace(rng, 200);
        auto const deps = data_dependencies(trace);
        auto const expected = testing::brute_data_edges(trace);
        CHECK(deps.edge_count() == expected.size());
        for (auto [i, j] : expected) {
            CHECK(deps.has_edge(i, j, DepKind::Data));
        }
    }
    for (int round = 0; round < 60; ++round) {
        auto const pkgs = testing::random_contracts(rng);
        auto world = testing::world_with_sender(pkgs);
        auto const trace = vm::execute_transaction(world, testing::random_tx(rng, pkgs));
        auto const deps = data_dependencies(trace);
        auto const expected = testing::brute_data_edges(trace);
        CHECK(deps.edge_count() == expected.size());
        for (std::size_t j = 0; j < trace.events.size(); ++j) {
            for (auto const &e : deps.dependencies(j)) {
                CHECK(e.from < j);
                CHECK(expected.contains({e.from, j}));
            }
        }
    }
}

TEST_CASE("dynamic control dependency follows the executed JUMPI")
{
    auto const t = run_single(
        "main: JUMPDEST / PUSH 1 / JUMPI @t / STOP / t: JUMPDEST / PUSH 3 / PUSH 4 / SSTORE / STOP");
    auto const pkg =
        testing::make_package("P", 0xA, "main: JUMPDEST / PUSH 1 / JUMPI @t / STOP / t: JUMPDEST / "
                                        "PUSH 3 / PUSH 4 / SSTORE / STOP",
                              {{"main", std::nullopt, "main", {}, true, true}});
    std::vector<vm::ContractPackage> const pkgs{pkg};
    auto const deps = dynamic_control_dependencies(t, pkgs);
    auto const jumpi = find_event(t, vm::Opcode::JUMPI);
    auto const store = find_event(t, vm::Opcode::SSTORE);
    CHECK(deps.has_edge(jumpi, store, DepKind::Control));
    CHECK(trace_dependencies(t, pkgs).depends_on(store, jumpi));
}

TEST_CASE("call graph: wallet and logic program")
{
    auto const pkgs = testing::load_fixture("walletlogic");
    auto const cg = build_call_graph(pkgs);
    FunctionRef const withdraw{"Wallet", "withdraw"};
    auto const callers = cg.callers(withdraw);
    REQUIRE(callers.size() == 2);
    CHECK(callers[0] == FunctionRef{"Logic", "logTrans"});
    CHECK(callers[1] == FunctionRef{"Wallet", "changeOwner"});
    CHECK(cg.edge({"Wallet", "changeOwner"}, withdraw)->kind == EdgeKind::Internal);
    CHECK(cg.edge({"Logic", "logTrans"}, withdraw)->kind == EdgeKind::External);
    CHECK(cg.edge({"Logic", "logTrans"}, withdraw)->declared);
    CHECK(cg.in_degree(withdraw) == 2);
    CHECK(cg.nodes().size() == 3);

    auto const dot = call_graph_to_dot(cg);
    CHECK(dot.find("digraph") != std::string::npos);
    CHECK(dot.find("withdraw") != std::string::npos);
}

TEST_CASE("call graph: no call opcodes, computed targets and constant selectors")
{
    auto const quiet = testing::make_package(
        "Q", 0xA, "f: JUMPDEST / PUSH 1 / PUSH 2 / ADD / POP / STOP", {{"f", 0x1, "f"}});
    std::vector<vm::ContractPackage> const one{quiet};
    auto const cg = build_call_graph(one);
    CHECK(cg.edges().empty());
    CHECK(cg.unresolved().empty());

    auto const bank = testing::load_fixture("bank");
    auto const bcg = build_call_graph(bank);
    CHECK(bcg.edges().empty());
    REQUIRE(bcg.unresolved().size() == 1);
    CHECK(bcg.unresolved()[0].caller == FunctionRef{"Bank", "withdrawBalance"});

    auto const logchain = testing::load_fixture("logchain");
    auto const fcg = build_call_graph(logchain);
    auto const *log_edge = fcg.edge({"Logging", "log"}, {"Logic", "logging"});
    REQUIRE(log_edge != nullptr);
    CHECK_FALSE(log_edge->declared);
    CHECK(log_edge->kind == EdgeKind::External);
    CHECK(fcg.edge({"Logic", "logging"}, {"Wallet", "withdraw"}) != nullptr);
    // The fallback's self-call targets log() through its selector.
    CHECK(fcg.edge({"Logging", "fallback"}, {"Logging", "log"}) != nullptr);
}

TEST_CASE("static features: value-carrying call, empty body and delegation")
{
    auto const bank = testing::load_fixture("bank");
    auto const cg = build_call_graph(bank);
    auto const &pkg = bank[0];
    auto const sf = extract_static_features(pkg, testing::function_named(pkg, "withdrawBalance"), cg);
    CHECK_FALSE(sf.has_modifier);
    CHECK(sf.has_call);
    CHECK_FALSE(sf.has_delegate);
    CHECK_FALSE(sf.has_tx_origin);
    CHECK_FALSE(sf.has_balance);
    CHECK(sf.can_send_eth);

    auto const deposit = extract_static_features(pkg, testing::function_named(pkg, "deposit"), cg);
    CHECK(deposit == StaticFeatures{});

    auto const empty = testing::make_package("E", 0xA, "f: JUMPDEST / STOP", {{"f", 0x1, "f"}});
    std::vector<vm::ContractPackage> const one{empty};
    CHECK(extract_static_features(empty, empty.functions[0], build_call_graph(one)) ==
          StaticFeatures{});

    auto const deleg = testing::load_fixture("delegation");
    auto const dcg = build_call_graph(deleg);
    auto const &dpkg = testing::package_named(deleg, "Delegation");
    auto const df = extract_static_features(dpkg, *dpkg.fallback(), dcg);
    CHECK(df.has_delegate);
    CHECK(df.has_call);
    CHECK(df.callee_external);
    CHECK_FALSE(df.can_send_eth);

    vm::FunctionDescriptor stranger;
    stranger.name = "nope";
    CHECK_THROWS_AS(extract_static_features(pkg, stranger, cg), std::invalid_argument);
}

TEST_CASE("static features: guard prologue, ORIGIN and BALANCE")
{
    auto const pkgs = testing::load_fixture("txorigin");
    auto const cg = build_call_graph(pkgs);
    auto const &pkg = pkgs[0];
    auto const t = extract_static_features(pkg, testing::function_named(pkg, "transferTo"), cg);
    CHECK(t.has_modifier);
    CHECK(t.has_tx_origin);
    CHECK(t.has_balance);
    CHECK(t.can_send_eth);
    auto const c =
        extract_static_features(pkg, testing::function_named(pkg, "transferToChecked"), cg);
    CHECK(c.has_modifier);
    CHECK_FALSE(c.has_tx_origin);
    auto const p = extract_static_features(pkg, testing::function_named(pkg, "ping"), cg);
    CHECK_FALSE(p.has_modifier);
    CHECK(p.has_tx_origin);
    CHECK_FALSE(p.can_send_eth);
    // The constant target is not a deployed contract.
    CHECK(p.callee_external);

    auto const names = StaticFeatures::names;
    CHECK(names[0] == "has_modifier");
    CHECK(names[6] == "callee_external");
}

TEST_CASE("function shape: wallet and logic values")
{
    auto const pkgs = testing::load_fixture("walletlogic");
    auto const cg = build_call_graph(pkgs);
    auto const &wallet = testing::package_named(pkgs, "Wallet");
    auto const &logic = testing::package_named(pkgs, "Logic");

    auto const withdraw = function_shape(wallet, testing::function_named(wallet, "withdraw"), cg);
    CHECK(withdraw.callers == 2);
    CHECK(withdraw.params == 3);

    auto const change = function_shape(wallet, testing::function_named(wallet, "changeOwner"), cg);
    CHECK(change.callers == 0);
    CHECK(change.params == 3);
    CHECK(change.complexity == 1);
    CHECK(change.cond_distance == 1);

    auto const log = function_shape(logic, testing::function_named(logic, "logTrans"), cg);
    CHECK(log.callers == 0);
    CHECK(log.params == 7);
    CHECK(log.complexity == 0);
    CHECK(log.cond_distance == 0);

    CHECK(function_shape(wallet, testing::function_named(wallet, "withdraw"), cg) == withdraw);
}

TEST_CASE("function shape: conditionals at entry count every JUMPI")
{
    auto const pkg = testing::make_package(
        "C", 0xA,
        "f: JUMPDEST / PUSH 0 / CALLDATALOAD / JUMPI @a / PUSH 0 / PUSH 0 / REVERT\n"
        "a: JUMPDEST / PUSH 8 / CALLDATALOAD / JUMPI @b / STOP\n"
        "b: JUMPDEST / PUSH 16 / CALLDATALOAD / JUMPI @c / STOP\n"
        "c: JUMPDEST / STOP",
        {{"f", 0x1, "f", {vm::ParamKind::Uint}}});
    std::vector<vm::ContractPackage> const one{pkg};
    auto const shape = function_shape(pkg, pkg.functions[0], build_call_graph(one));
    CHECK(shape.complexity == 3);
    CHECK(shape.cond_distance == 0);
}

TEST_CASE("function shape: parameter dimension is additive")
{
    TestRng rng(19);
    std::vector<vm::ParamKind> const kinds{vm::ParamKind::Uint, vm::ParamKind::Address,
                                           vm::ParamKind::Bytes, vm::ParamKind::Array};
    for (int round = 0; round < 200; ++round) {
        std::vector<vm::ParamKind> params;
        auto const n = rng.below(6);
        for (std::size_t i = 0; i < n; ++i) {
            params.push_back(rng.pick(kinds));
        }
        auto const base = param_dimension(params);
        auto const extra = rng.pick(kinds);
        params.push_back(extra);
        CHECK(param_dimension(params) == base + (extra == vm::ParamKind::Uint ? 1 : 2));
    }
}

TEST_CASE("dot export names every block")
{
    auto const cfg = Cfg::build(vm::assemble("PUSH 1 / JUMPI @t / STOP / t: JUMPDEST / STOP"), 0);
    auto const dot = cfg_to_dot(cfg, "f");
    CHECK(dot.find("digraph") != std::string::npos);
    CHECK(dot.find("JUMPI") != std::string::npos);
}
