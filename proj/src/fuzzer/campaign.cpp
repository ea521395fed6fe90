#include <xcfuzz/fuzzer/campaign.hpp>

#include <xcfuzz/vm/interpreter.hpp>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <set>
#include <stdexcept>
#include <thread>
#include <tuple>

namespace xcfuzz::fuzzer
{
    std::string_view to_string(BudgetMode mode)
    {
        return mode == BudgetMode::Seconds ? "seconds" : "attempts";
    }

    BudgetMode budget_mode_from_string(std::string_view text)
    {
        if (text == "seconds") {
            return BudgetMode::Seconds;
        }
        if (text == "attempts") {
            return BudgetMode::Attempts;
        }
        throw std::invalid_argument(fmt::format("unknown budget mode '{}'", text));
    }

    std::string_view to_string(PathStatus s)
    {
        switch (s) {
        case PathStatus::Fuzzed:
            return "fuzzed";
        case PathStatus::Skipped:
            return "skipped";
        case PathStatus::EntryNotPublic:
            return "entry-not-public";
        }
        return "?";
    }

    PathStatus path_status_from_string(std::string_view text)
    {
        for (auto s : {PathStatus::Fuzzed, PathStatus::Skipped, PathStatus::EntryNotPublic}) {
            if (to_string(s) == text) {
                return s;
            }
        }
        throw std::invalid_argument(fmt::format("unknown path status '{}'", text));
    }

    std::uint64_t FuzzReport::total_attempts() const
    {
        std::uint64_t n = 0;
        for (auto const &c : contracts) {
            n += c.attempts;
        }
        return n;
    }

    namespace
    {
        using Clock = std::chrono::steady_clock;
        using Key = std::tuple<oracles::VulnCategory, vm::Address, std::string, std::size_t>;

        Key key_of(oracles::VulnCategory c, vm::Address a, std::string const &f, std::size_t pc)
        {
            return {c, a, f, pc};
        }

        std::string log_path(std::string const &chain)
        {
            std::string out;
            for (std::size_t i = 0; i < chain.size(); ++i) {
                if (chain.compare(i, 4, " -> ") == 0) {
                    out += '>';
                    i += 3;
                }
                else {
                    out += chain[i];
                }
            }
            return out;
        }

        struct Located
        {
            vm::ContractPackage const *package = nullptr;
            vm::FunctionDescriptor const *function = nullptr;
        };

        Located locate(std::vector<vm::ContractPackage> const &packages,
                       scheduler::FunctionRef const &ref)
        {
            for (auto const &p : packages) {
                if (p.name == ref.contract) {
                    return {&p, p.find_function(ref.function)};
                }
            }
            return {};
        }

        std::string name_at(std::vector<vm::ContractPackage> const &packages, vm::Address a)
        {
            for (auto const &p : packages) {
                if (p.address == a) {
                    return p.name;
                }
            }
            return fmt::format("{:#x}", a);
        }

        // Everything one path needs to run attempts.
        struct PathPlan
        {
            std::size_t queue_position = 0;
            std::size_t contract_position = 0;
            scheduler::PrioritizedPath const *path = nullptr;
            std::string chain;
            std::vector<CallInput> init_calls;
            CallInput entry;
            bool runnable = false;
            std::uint64_t attempts = 0;
        };

        struct ContractGroup
        {
            std::string name;
            std::vector<std::size_t> queue_positions;
        };

        struct GroupResult
        {
            ContractRecord record;
            std::vector<PathRecord> paths;
            std::vector<FuzzFinding> findings;
        };

        class Worker
        {
        public:
            Worker(Campaign const &c, vm::WorldState const &base, ArgPools const &pools,
                   Clock::time_point start)
                : campaign_(c)
                , base_(base)
                , pools_(pools)
                , start_(start)
            {
            }

            GroupResult run(ContractGroup const &group)
            {
                auto const &cfg = campaign_.config;
                GroupResult out;
                out.record.name = group.name;
                auto const it = campaign_.suspicious_contracts.find(group.name);
                out.record.suspicious = it != campaign_.suspicious_contracts.end() && it->second;
                out.record.budget =
                    out.record.suspicious ? cfg.budget.vulnerable : cfg.budget.benign;

                Rng rng(learner::derive_seed(cfg.seed, learner::fnv1a64(group.name)));
                std::vector<PathPlan> plans;
                for (std::size_t i = 0; i < group.queue_positions.size(); ++i) {
                    plans.push_back(plan(group.queue_positions[i], i, rng));
                }

                bool const skipped = out.record.budget <= 0.0;
                std::size_t runnable = 0;
                for (auto const &p : plans) {
                    runnable += p.runnable ? 1 : 0;
                }

                auto const group_start = Clock::now();
                std::uint64_t const round_limit =
                    cfg.budget.mode == BudgetMode::Attempts
                        ? static_cast<std::uint64_t>(std::ceil(out.record.budget))
                        : 0;
                std::set<Key> seen;
                bool exhausted = skipped || runnable == 0 || cfg.mutations_per_round == 0;
                for (std::uint64_t round = 0; !exhausted; ++round) {
                    if (cfg.budget.mode == BudgetMode::Attempts && round >= round_limit) {
                        break;
                    }
                    for (auto &p : plans) {
                        if (!p.runnable || exhausted) {
                            continue;
                        }
                        for (std::size_t m = 0; m < cfg.mutations_per_round; ++m) {
                            if (cfg.budget.mode == BudgetMode::Seconds &&
                                seconds_since(group_start) >= out.record.budget) {
                                exhausted = true;
                                break;
                            }
                            if (p.attempts > 0) {
                                p.entry = mutate(p.entry, pools_, rng);
                            }
                            ++p.attempts;
                            ++out.record.attempts;
                            attempt(p, out, seen);
                        }
                    }
                }
                out.record.elapsed = cfg.budget.mode == BudgetMode::Attempts
                                         ? static_cast<double>(out.record.attempts)
                                         : seconds_since(group_start);

                for (auto const &p : plans) {
                    PathRecord r;
                    r.chain = p.chain;
                    r.contract = group.name;
                    r.queue_position = p.queue_position;
                    r.attempts = p.attempts;
                    r.status = !p.runnable ? PathStatus::EntryNotPublic
                               : skipped   ? PathStatus::Skipped
                                           : PathStatus::Fuzzed;
                    out.paths.push_back(std::move(r));
                }
                return out;
            }

        private:
            static double seconds_since(Clock::time_point t)
            {
                return std::chrono::duration<double>(Clock::now() - t).count();
            }

            PathPlan plan(std::size_t queue_position, std::size_t contract_position, Rng &rng)
            {
                auto const &path = campaign_.queue[queue_position];
                PathPlan p;
                p.queue_position = queue_position;
                p.contract_position = contract_position;
                p.path = &path;
                p.chain = scheduler::chain_string(path.chain);
                auto const head = locate(campaign_.packages, path.chain.front());
                if (head.function == nullptr || !head.function->is_public) {
                    return p;
                }
                p.runnable = true;
                // Path-unrelated public functions of the chain's contracts
                // initialise state first, in manifest order.
                std::vector<std::string> contracts;
                for (auto const &f : path.chain) {
                    if (std::find(contracts.begin(), contracts.end(), f.contract) ==
                        contracts.end()) {
                        contracts.push_back(f.contract);
                    }
                }
                for (auto const &name : contracts) {
                    auto const pkg = locate(campaign_.packages, {name, ""});
                    if (pkg.package == nullptr) {
                        continue;
                    }
                    for (auto const &fn : pkg.package->functions) {
                        bool const on_chain =
                            std::find(path.chain.begin(), path.chain.end(),
                                      scheduler::FunctionRef{name, fn.name}) != path.chain.end();
                        if (fn.is_public && !fn.is_fallback && !on_chain) {
                            p.init_calls.push_back(
                                initial_call(pkg.package->address, fn, pools_, rng));
                        }
                    }
                }
                p.entry = initial_call(head.package->address, *head.function, pools_, rng);
                return p;
            }

            void attempt(PathPlan const &p, GroupResult &out, std::set<Key> &seen)
            {
                auto const &cfg = campaign_.config;
                HarnessConfig harness;
                harness.address = cfg.attacker;
                harness.balance = cfg.attacker_balance;
                harness.reentry_limit = cfg.reentry_limit;
                harness.target = p.entry.target;
                harness.selector = p.entry.selector;
                harness.args = encode_args(p.entry.params);

                auto world = base_;
                install_harness(world, harness);
                std::vector<vm::TransactionRequest> txs;
                for (auto const &c : p.init_calls) {
                    txs.push_back(to_transaction(c, cfg.attacker, cfg.budget.step_budget));
                }
                txs.push_back(to_transaction(p.entry, cfg.attacker, cfg.budget.step_budget));

                vm::ExecutionTrace trace;
                try {
                    for (auto const &tx : txs) {
                        trace = vm::execute_transaction(world, tx);
                    }
                }
                catch (std::invalid_argument const &e) {
                    spdlog::debug("event=attempt_error path={} error=\"{}\"", log_path(p.chain),
                                  e.what());
                    return;
                }

                if (trace.outcome == vm::Outcome::OutOfSteps) {
                    return;
                }
                auto const findings = oracles::detect_all(trace, world.packages());
                std::optional<ReentryEvidence> evidence;
                for (auto const &f : findings) {
                    if (f.contract == cfg.attacker) {
                        continue;
                    }
                    auto const key = key_of(f.category, f.contract, f.function, f.critical_pc);
                    if (!seen.insert(key).second) {
                        continue;
                    }
                    FuzzFinding ff;
                    ff.category = f.category;
                    ff.contract = name_at(campaign_.packages, f.contract);
                    ff.contract_address = f.contract;
                    ff.function = f.function;
                    ff.critical_pc = f.critical_pc;
                    ff.cross_contract = f.cross_contract;
                    ff.contract_count = f.contract_addrs.size();
                    ff.critical_event = f.critical_event;
                    ff.related_event = f.related_event;
                    ff.tx_sequence = txs;
                    ff.harness = harness;
                    ff.path = p.chain;
                    ff.queue_contract = out.record.name;
                    ff.queue_position = p.queue_position;
                    ff.contract_position = p.contract_position;
                    ff.attempt = out.record.attempts;
                    if (f.category == oracles::VulnCategory::Reentrancy) {
                        if (!evidence) {
                            evidence = reentry_evidence(trace, cfg.attacker);
                        }
                        ff.reentry_confirmed = evidence->reentered && evidence->gain > 0;
                    }
                    ff.t = cfg.budget.mode == BudgetMode::Attempts
                               ? static_cast<double>(out.record.attempts)
                               : seconds_since(start_);
                    spdlog::info("event=finding path={} t={} category={} contract={} "
                                 "function={} pc={} cross={}",
                                 log_path(ff.path), ff.t, oracles::to_string(ff.category),
                                 ff.contract, ff.function, ff.critical_pc, ff.cross_contract);
                    out.findings.push_back(std::move(ff));
                }
            }

            Campaign const &campaign_;
            vm::WorldState const &base_;
            ArgPools const &pools_;
            Clock::time_point start_;
        };
    }

    FuzzReport run_campaign(Campaign const &campaign)
    {
        auto const &cfg = campaign.config;
        FuzzReport report;
        report.time_unit = cfg.budget.mode;
        if (campaign.queue.empty()) {
            return report;
        }
        if (cfg.budget.benign > cfg.budget.vulnerable || cfg.budget.benign < 0.0) {
            throw std::invalid_argument("budgets must satisfy 0 <= benign <= vulnerable");
        }

        std::vector<ContractGroup> groups;
        std::map<std::string, std::size_t> group_of;
        for (std::size_t i = 0; i < campaign.queue.size(); ++i) {
            auto const &name = campaign.queue[i].target.contract;
            auto [it, fresh] = group_of.emplace(name, groups.size());
            if (fresh) {
                groups.push_back({name, {}});
            }
            groups[it->second].queue_positions.push_back(i);
        }

        auto const base = vm::deploy(campaign.packages);
        auto const pools = make_pools(campaign.packages, cfg.attacker, cfg.attacker_balance);
        auto const start = Clock::now();

        std::vector<GroupResult> results(groups.size());
        std::atomic<std::size_t> next{0};
        auto work = [&] {
            Worker worker(campaign, base, pools, start);
            for (auto i = next.fetch_add(1); i < groups.size(); i = next.fetch_add(1)) {
                spdlog::debug("event=contract_start contract={}", groups[i].name);
                results[i] = worker.run(groups[i]);
                spdlog::debug("event=contract_done contract={} attempts={}", groups[i].name,
                              results[i].record.attempts);
            }
        };
        auto const workers = std::max<std::size_t>(1, std::min(cfg.workers, groups.size()));
        if (workers == 1) {
            work();
        }
        else {
            std::vector<std::thread> threads;
            for (std::size_t w = 0; w < workers; ++w) {
                threads.emplace_back(work);
            }
            for (auto &t : threads) {
                t.join();
            }
        }

        std::set<Key> seen;
        report.paths.resize(campaign.queue.size());
        for (auto &r : results) {
            report.contracts.push_back(r.record);
            for (auto &p : r.paths) {
                auto const pos = p.queue_position;
                report.paths[pos] = std::move(p);
            }
            for (auto &f : r.findings) {
                if (seen.insert(key_of(f.category, f.contract_address, f.function, f.critical_pc))
                        .second) {
                    report.findings.push_back(std::move(f));
                }
            }
        }
        return report;
    }

    ReplayOutcome replay(std::vector<vm::ContractPackage> const &packages,
                         FuzzFinding const &finding)
    {
        ReplayOutcome out;
        auto world = vm::deploy(packages);
        install_harness(world, finding.harness);
        for (auto const &tx : finding.tx_sequence) {
            out.trace = vm::execute_transaction(world, tx);
        }
        out.findings = oracles::detect_all(out.trace, world.packages());
        out.retriggered = std::any_of(out.findings.begin(), out.findings.end(),
                                      [&](oracles::Finding const &f) {
                                          return f.category == finding.category &&
                                                 f.contract == finding.contract_address &&
                                                 f.function == finding.function &&
                                                 f.critical_pc == finding.critical_pc;
                                      });
        return out;
    }
}
