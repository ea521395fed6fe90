#include <xcfuzz/fuzzer/mutate.hpp>

#include <algorithm>

namespace xcfuzz::fuzzer
{
    namespace
    {
        // Retries bound the redraw loops; pools of one element cannot change.
        constexpr int redraw_limit = 64;

        vm::Word draw_element(ArgPools const &pools, Rng &rng)
        {
            if (!pools.addresses.empty() && rng.chance(0.5)) {
                return rng.pick(pools.addresses);
            }
            return draw_uint(pools, rng);
        }

        void mutate_dynamic(ParamValue &p, ArgPools const &pools, Rng &rng)
        {
            auto const before = p;
            for (int i = 0; i < redraw_limit && p == before; ++i) {
                bool const resize = rng.chance(0.5);
                if (p.kind == vm::ParamKind::Array) {
                    if (resize || p.elements.empty()) {
                        auto const n = rng.below(max_dynamic_length + 1);
                        p.elements.resize(n);
                        for (auto &e : p.elements) {
                            e = draw_element(pools, rng);
                        }
                    }
                    else {
                        p.elements[rng.below(p.elements.size())] = draw_element(pools, rng);
                    }
                }
                else {
                    if (resize || p.bytes.empty()) {
                        auto const n = rng.below(8 * max_dynamic_length + 1);
                        auto const old = p.bytes.size();
                        p.bytes.resize(n);
                        for (auto k = old; k < n; ++k) {
                            p.bytes[k] = static_cast<std::uint8_t>(rng.below(256));
                        }
                    }
                    else {
                        auto const k = rng.below(p.bytes.size());
                        p.bytes[k] ^= static_cast<std::uint8_t>(1U << rng.below(8));
                    }
                }
            }
        }
    }

    std::vector<vm::Word> encode_args(std::vector<ParamValue> const &params)
    {
        std::vector<vm::Word> heads;
        std::vector<vm::Word> tail;
        auto const head_bytes = 8 * params.size();
        for (auto const &p : params) {
            switch (p.kind) {
            case vm::ParamKind::Uint:
            case vm::ParamKind::Address:
                heads.push_back(p.scalar);
                break;
            case vm::ParamKind::Array:
                heads.push_back(head_bytes + 8 * tail.size());
                tail.push_back(p.elements.size());
                tail.insert(tail.end(), p.elements.begin(), p.elements.end());
                break;
            case vm::ParamKind::Bytes: {
                heads.push_back(head_bytes + 8 * tail.size());
                tail.push_back(p.bytes.size());
                for (std::size_t i = 0; i < p.bytes.size(); i += 8) {
                    vm::Word w = 0;
                    for (std::size_t k = 0; k < 8; ++k) {
                        auto const b = i + k < p.bytes.size() ? p.bytes[i + k] : 0;
                        w = (w << 8) | b;
                    }
                    tail.push_back(w);
                }
                break;
            }
            }
        }
        heads.insert(heads.end(), tail.begin(), tail.end());
        return heads;
    }

    ArgPools make_pools(std::vector<vm::ContractPackage> const &packages, vm::Address attacker,
                        vm::Word attacker_balance)
    {
        ArgPools pools;
        for (auto const &p : packages) {
            pools.addresses.push_back(p.address);
        }
        pools.addresses.push_back(attacker);
        pools.values = {0, 1, attacker_balance};
        return pools;
    }

    vm::TransactionRequest to_transaction(CallInput const &call, vm::Address sender,
                                          std::uint64_t step_budget)
    {
        vm::TransactionRequest tx;
        tx.caller = sender;
        tx.origin = sender;
        tx.target = call.target;
        tx.selector = call.selector;
        tx.args = encode_args(call.params);
        tx.value = call.value;
        tx.step_budget = step_budget;
        return tx;
    }

    vm::Word draw_uint(ArgPools const &pools, Rng &rng)
    {
        if (!pools.uint_boundaries.empty() && rng.chance(0.5)) {
            return rng.pick(pools.uint_boundaries);
        }
        return rng.chance(0.5) ? rng.below(256) : rng.next();
    }

    ParamValue draw_param(vm::ParamKind kind, ArgPools const &pools, Rng &rng)
    {
        ParamValue p;
        p.kind = kind;
        switch (kind) {
        case vm::ParamKind::Uint:
            p.scalar = draw_uint(pools, rng);
            break;
        case vm::ParamKind::Address:
            p.scalar = pools.addresses.empty() ? 0 : rng.pick(pools.addresses);
            break;
        case vm::ParamKind::Array:
            p.elements.resize(rng.below(max_dynamic_length + 1));
            for (auto &e : p.elements) {
                e = draw_element(pools, rng);
            }
            break;
        case vm::ParamKind::Bytes:
            p.bytes.resize(rng.below(8 * max_dynamic_length + 1));
            for (auto &b : p.bytes) {
                b = static_cast<std::uint8_t>(rng.below(256));
            }
            break;
        }
        return p;
    }

    CallInput initial_call(vm::Address target, vm::FunctionDescriptor const &fn,
                           ArgPools const &pools, Rng &rng)
    {
        CallInput call;
        call.target = target;
        call.selector = fn.selector;
        for (auto kind : fn.params) {
            call.params.push_back(draw_param(kind, pools, rng));
        }
        return call;
    }

    namespace
    {
        CallInput mutate_value(CallInput out, ArgPools const &pools, Rng &rng)
        {
            std::vector<vm::Word> others;
            for (auto v : pools.values) {
                if (v != out.value && std::find(others.begin(), others.end(), v) == others.end()) {
                    others.push_back(v);
                }
            }
            if (!others.empty()) {
                out.value = rng.pick(others);
            }
            return out;
        }
    }

    CallInput mutate(CallInput const &call, ArgPools const &pools, Rng &rng)
    {
        auto out = call;
        // Fields: each parameter, then the value.
        auto const field = rng.below(call.params.size() + 1);
        if (field == call.params.size()) {
            return mutate_value(out, pools, rng);
        }
        auto &p = out.params[field];
        switch (p.kind) {
        case vm::ParamKind::Uint:
            for (int i = 0; i < redraw_limit && p.scalar == call.params[field].scalar; ++i) {
                p.scalar = draw_uint(pools, rng);
            }
            break;
        case vm::ParamKind::Address:
            for (int i = 0; i < redraw_limit && p.scalar == call.params[field].scalar &&
                            pools.addresses.size() > 1;
                 ++i) {
                p.scalar = rng.pick(pools.addresses);
            }
            break;
        case vm::ParamKind::Array:
        case vm::ParamKind::Bytes:
            mutate_dynamic(p, pools, rng);
            break;
        }
        // A parameter whose pool cannot produce a new value yields to the value field.
        return out == call ? mutate_value(out, pools, rng) : out;
    }
}
