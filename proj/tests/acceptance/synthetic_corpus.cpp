#include "acceptance/synthetic_corpus.hpp"

#include "support/programs.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <stdexcept>

namespace xcfuzz::testing
{
    namespace
    {
        inline constexpr vm::Address attacker = 0xA77A;

        enum class Kind
        {
            Bank,
            Forwarder,
            OriginPayout,
            Vault,
            SafeBank,
            CheckedPayout,
            Counter,
            Registry,
            Token,
            Library,
            Router,
        };

        struct Plan
        {
            Kind kind;
            std::size_t partner = 0; // index of the library or vault it works with
        };

        std::string pad(TestRng &rng)
        {
            static std::vector<std::string> const ops{"ADD", "MUL", "AND", "OR", "SUB", "LT"};
            std::string s;
            for (auto n = rng.below(4); n > 0; --n) {
                s += fmt::format("PUSH {} / PUSH {} / {} / POP\n", rng.below(200),
                                 rng.below(200), rng.pick(ops));
            }
            return s;
        }

        struct Builder
        {
            TestRng &rng;
            std::size_t index;
            std::string source;
            std::vector<FnSpec> fns;

            void function(std::string const &name, std::string const &body,
                          std::vector<vm::ParamKind> params = {},
                          std::vector<std::string> calls = {})
            {
                source += fmt::format("{}: JUMPDEST\n{}{}\n", name, pad(rng), body);
                fns.push_back({name, static_cast<vm::Selector>(0x10000000U + (index << 8U) +
                                                               fns.size()),
                               name, std::move(params), true, false, false, std::move(calls)});
            }

            void fallback(std::string const &body)
            {
                source += fmt::format("fallback: JUMPDEST\n{}{}\n", pad(rng), body);
                fns.push_back({"fallback", std::nullopt, "fallback", {}, true, true});
            }

            // Pure arithmetic helper present in some contracts of every kind.
            void maybe_helper()
            {
                if (rng.chance(1, 2)) {
                    function("version", fmt::format("PUSH {} / PUSH 1 / ADD / POP\nSTOP",
                                                    rng.below(100)));
                }
            }
        };

        std::string const bank_deposit = "CALLVALUE / CALLER / SLOAD / ADD\nCALLER / SSTORE\nSTOP";

        std::string payout(vm::Address self, char const *guard)
        {
            return fmt::format("{} / PUSH 0 / SLOAD / EQ\nJUMPI @ok\nPUSH 0 / PUSH 0 / REVERT\n"
                               "ok: JUMPDEST\nPUSH 0 / PUSH 0 / PUSH 0 / PUSH 0\n"
                               "PUSH {:#x} / BALANCE\nPUSH 8 / CALLDATALOAD\nPUSH 0\nCALL\nPOP\n"
                               "STOP",
                               guard, self);
        }

        vm::ContractPackage build(TestRng &rng, std::size_t index, Plan const &plan,
                                  std::vector<std::string> const &names,
                                  std::vector<vm::Address> const &addrs)
        {
            Builder b{rng, index, {}, {}};
            vm::Address const self = addrs[index];
            vm::Word balance = 0;
            std::map<vm::Word, vm::Word> storage;
            using vm::ParamKind;
            switch (plan.kind) {
            case Kind::Bank:
                b.function("deposit", bank_deposit);
                b.function("withdrawBalance",
                           "PUSH 0 / PUSH 0 / PUSH 0 / PUSH 0\nCALLER / SLOAD\nCALLER\nPUSH 0\n"
                           "CALL\nPOP\nPUSH 0 / CALLER / SSTORE\nSTOP");
                b.maybe_helper();
                balance = 100;
                storage[attacker] = 5 + rng.below(20);
                break;
            case Kind::SafeBank:
                b.function("deposit", bank_deposit);
                b.function("withdrawBalance",
                           "PUSH 0 / PUSH 0 / PUSH 0 / PUSH 0\nCALLER / SLOAD\n"
                           "PUSH 0 / CALLER / SSTORE\nCALLER\nPUSH 0\nCALL\nPOP\nSTOP");
                b.maybe_helper();
                balance = 100;
                storage[attacker] = 5 + rng.below(20);
                break;
            case Kind::Forwarder:
                b.fallback("PUSH 0 / CALLDATALOAD / PUSH 0 / MSTORE\n"
                           "PUSH 8 / CALLDATALOAD / PUSH 8 / MSTORE\n"
                           "PUSH 0 / PUSH 0\nCALLDATASIZE\nPUSH 0\nPUSH 1 / SLOAD\nPUSH 0\n"
                           "DELEGATECALL\nPOP\nSTOP");
                b.maybe_helper();
                storage[0] = 1;
                storage[1] = addrs[plan.partner];
                break;
            case Kind::Library:
                b.function("setOwner", "CALLER / PUSH 0 / SSTORE\nSTOP");
                b.function("setValue", "PUSH 8 / CALLDATALOAD / PUSH 2 / SSTORE\nSTOP",
                           {ParamKind::Uint});
                break;
            case Kind::OriginPayout:
                b.function("transferTo", payout(self, "ORIGIN"), {ParamKind::Address});
                b.maybe_helper();
                balance = 50;
                storage[0] = attacker;
                break;
            case Kind::CheckedPayout:
                b.function("transferToChecked", payout(self, "CALLER"), {ParamKind::Address});
                b.function("deposit", bank_deposit);
                balance = 50;
                storage[0] = attacker;
                break;
            case Kind::Vault:
                b.function("withdraw",
                           "PUSH 0 / PUSH 0 / PUSH 0 / PUSH 0\nPUSH 8 / CALLDATALOAD / SLOAD\n"
                           "PUSH 8 / CALLDATALOAD\nPUSH 0\nCALL\nPOP\n"
                           "PUSH 0 / PUSH 8 / CALLDATALOAD / SSTORE\nSTOP",
                           {ParamKind::Address});
                b.maybe_helper();
                balance = 100;
                storage[attacker] = 5 + rng.below(20);
                break;
            case Kind::Router:
                b.function("route",
                           fmt::format("PUSH {:#x} / PUSH 0 / MSTORE\n"
                                       "PUSH 16 / CALLDATALOAD / PUSH 8 / MSTORE\n"
                                       "PUSH 0 / PUSH 0 / PUSH 16 / PUSH 0\nPUSH 0\n"
                                       "PUSH 8 / CALLDATALOAD\nPUSH 0\nCALL\nPOP\nSTOP",
                                       0x10000000U + (plan.partner << 8U)),
                           {ParamKind::Address, ParamKind::Address},
                           {names[plan.partner] + ".withdraw"});
                break;
            case Kind::Counter:
                b.function("increment",
                           fmt::format("PUSH 0 / SLOAD / PUSH {} / ADD / PUSH 0 / SSTORE\nSTOP",
                                       1 + rng.below(9)));
                b.function("reset", "CALLER / PUSH 1 / SLOAD / EQ\nJUMPI @ok\n"
                                    "PUSH 0 / PUSH 0 / REVERT\nok: JUMPDEST\n"
                                    "PUSH 0 / PUSH 0 / SSTORE\nSTOP");
                storage[1] = attacker;
                break;
            case Kind::Registry:
                b.function("set", "PUSH 16 / CALLDATALOAD / PUSH 8 / CALLDATALOAD / SSTORE\nSTOP",
                           {ParamKind::Uint, ParamKind::Uint});
                b.function("get", "PUSH 8 / CALLDATALOAD / SLOAD / POP\nSTOP",
                           {ParamKind::Uint});
                b.maybe_helper();
                break;
            case Kind::Token:
                b.function("transfer",
                           "CALLER / SLOAD / PUSH 16 / CALLDATALOAD / GT\nJUMPI @fail\n"
                           "PUSH 16 / CALLDATALOAD / CALLER / SLOAD / SUB / CALLER / SSTORE\n"
                           "PUSH 16 / CALLDATALOAD / PUSH 8 / CALLDATALOAD / SLOAD / ADD\n"
                           "PUSH 8 / CALLDATALOAD / SSTORE\nSTOP\n"
                           "fail: JUMPDEST / PUSH 0 / PUSH 0 / REVERT",
                           {ParamKind::Address, ParamKind::Uint});
                b.maybe_helper();
                storage[attacker] = 100 + rng.below(100);
                break;
            }
            return make_package(names[index], self, b.source, b.fns, balance, storage);
        }

        char const *stem(Kind k)
        {
            switch (k) {
            case Kind::Bank:
                return "Bank";
            case Kind::Forwarder:
                return "Forwarder";
            case Kind::OriginPayout:
                return "Payout";
            case Kind::Vault:
                return "Vault";
            case Kind::SafeBank:
                return "SafeBank";
            case Kind::CheckedPayout:
                return "CheckedPayout";
            case Kind::Counter:
                return "Counter";
            case Kind::Registry:
                return "Registry";
            case Kind::Token:
                return "Token";
            case Kind::Library:
                return "Library";
            case Kind::Router:
                return "Router";
            }
            return "Contract";
        }
    }

    SyntheticCorpus synthetic_corpus(std::uint64_t seed, std::size_t contracts,
                                     std::size_t planted)
    {
        if (contracts < 2 * planted) {
            throw std::invalid_argument("synthetic corpus needs two contracts per planted one");
        }
        TestRng rng(seed);
        static Kind const planted_cycle[] = {Kind::Bank, Kind::Forwarder, Kind::OriginPayout,
                                             Kind::Vault};
        static std::vector<Kind> const benign{Kind::SafeBank, Kind::CheckedPayout,
                                              Kind::Counter, Kind::Registry, Kind::Token};

        // Plans first, then a shuffled slot order; partners refer to plans.
        std::vector<Plan> plans;
        for (std::size_t i = 0; i < planted; ++i) {
            plans.push_back({planted_cycle[i % 4]});
        }
        for (std::size_t i = 0; i < planted; ++i) {
            if (plans[i].kind == Kind::Forwarder) {
                plans[i].partner = plans.size();
                plans.push_back({Kind::Library});
            }
            else if (plans[i].kind == Kind::Vault) {
                plans.push_back({Kind::Router, i});
            }
        }
        while (plans.size() < contracts) {
            plans.push_back({rng.pick(benign)});
        }

        std::vector<std::size_t> slot(plans.size());
        for (std::size_t i = 0; i < slot.size(); ++i) {
            slot[i] = i;
        }
        for (std::size_t i = slot.size(); i > 1; --i) {
            std::swap(slot[i - 1], slot[rng.below(i)]);
        }
        // slot[k] = plan placed at position k; where[p] = position of plan p.
        std::vector<std::size_t> where(plans.size());
        for (std::size_t k = 0; k < slot.size(); ++k) {
            where[slot[k]] = k;
        }

        std::vector<std::string> names(plans.size());
        std::vector<vm::Address> addrs(plans.size());
        std::vector<Plan> placed(plans.size());
        for (std::size_t k = 0; k < slot.size(); ++k) {
            auto plan = plans[slot[k]];
            if (plan.kind == Kind::Forwarder || plan.kind == Kind::Router) {
                plan.partner = where[plan.partner];
            }
            placed[k] = plan;
            names[k] = fmt::format("{}{:02}", stem(plan.kind), k);
            addrs[k] = 0x1000 + k;
        }

        SyntheticCorpus out;
        for (std::size_t k = 0; k < placed.size(); ++k) {
            out.packages.push_back(build(rng, k, placed[k], names, addrs));
            if (slot[k] < planted) {
                out.planted.insert(names[k]);
            }
        }
        return out;
    }
}
