#include <xcfuzz/vm/world.hpp>

#include <fmt/format.h>

#include <set>

namespace xcfuzz::vm
{
    std::string_view to_string(ParamKind kind)
    {
        switch (kind) {
        case ParamKind::Uint:
            return "uint";
        case ParamKind::Address:
            return "address";
        case ParamKind::Bytes:
            return "bytes";
        case ParamKind::Array:
            return "array";
        }
        return "?";
    }

    ParamKind param_kind_from_string(std::string_view text)
    {
        if (text == "uint") {
            return ParamKind::Uint;
        }
        if (text == "address") {
            return ParamKind::Address;
        }
        if (text == "bytes") {
            return ParamKind::Bytes;
        }
        if (text == "array") {
            return ParamKind::Array;
        }
        throw std::invalid_argument(fmt::format("unknown parameter kind '{}'", text));
    }

    FunctionDescriptor const *ContractPackage::find_function(std::string_view fn) const
    {
        for (auto const &f : functions) {
            if (f.name == fn) {
                return &f;
            }
        }
        return nullptr;
    }

    FunctionDescriptor const *ContractPackage::find_selector(Selector s) const
    {
        for (auto const &f : functions) {
            if (f.selector == s) {
                return &f;
            }
        }
        return nullptr;
    }

    FunctionDescriptor const *ContractPackage::fallback() const
    {
        for (auto const &f : functions) {
            if (f.is_fallback) {
                return &f;
            }
        }
        return nullptr;
    }

    void validate_package(ContractPackage const &pkg)
    {
        std::vector<Instruction> instructions;
        try {
            instructions = disassemble(pkg.code);
        }
        catch (DecodeError const &e) {
            throw DeployError(fmt::format("{}: {}", pkg.name, e.what()));
        }

        std::set<std::size_t> jumpdests;
        for (auto const &ins : instructions) {
            if (ins.op == Opcode::JUMPDEST) {
                jumpdests.insert(ins.pc);
            }
        }
        for (std::size_t i = 1; i < instructions.size(); ++i) {
            auto const &ins = instructions[i];
            auto const &prev = instructions[i - 1];
            if ((ins.op == Opcode::JUMP || ins.op == Opcode::JUMPI) &&
                is_push(prev.op) && !jumpdests.contains(prev.immediate)) {
                throw DeployError(fmt::format(
                    "{}: invalid jump target {} at pc {}",
                    pkg.name,
                    prev.immediate,
                    ins.pc));
            }
        }

        std::set<Selector> selectors;
        std::set<std::string> names;
        std::size_t fallbacks = 0;
        for (auto const &f : pkg.functions) {
            if (!names.insert(f.name).second) {
                throw DeployError(
                    fmt::format("{}: duplicate function name '{}'", pkg.name, f.name));
            }
            if (f.is_fallback) {
                ++fallbacks;
                if (!f.params.empty()) {
                    throw DeployError(fmt::format(
                        "{}: fallback '{}' must not take parameters", pkg.name, f.name));
                }
                if (f.selector) {
                    throw DeployError(fmt::format(
                        "{}: fallback '{}' must not declare a selector", pkg.name, f.name));
                }
            }
            else if (!f.selector) {
                throw DeployError(
                    fmt::format("{}: function '{}' has no selector", pkg.name, f.name));
            }
            else if (!selectors.insert(*f.selector).second) {
                throw DeployError(fmt::format(
                    "{}: selector {} of '{}' collides with another function",
                    pkg.name,
                    format_selector(*f.selector),
                    f.name));
            }
            if (!jumpdests.contains(f.entry_pc)) {
                throw DeployError(fmt::format(
                    "{}: entry pc {} of '{}' is not a JUMPDEST",
                    pkg.name,
                    f.entry_pc,
                    f.name));
            }
        }
        if (fallbacks > 1) {
            throw DeployError(fmt::format("{}: more than one fallback", pkg.name));
        }
    }

    Account const *WorldState::find(Address a) const
    {
        auto const it = accounts_.find(a);
        return it == accounts_.end() ? nullptr : &it->second;
    }

    Account *WorldState::find(Address a)
    {
        auto const it = accounts_.find(a);
        return it == accounts_.end() ? nullptr : &it->second;
    }

    void WorldState::add_account(Address a, Word balance)
    {
        if (accounts_.contains(a)) {
            throw DeployError(fmt::format("duplicate address {}", format_address(a)));
        }
        accounts_.emplace(a, Account{a, balance, {}, std::nullopt});
    }

    void WorldState::install(ContractPackage pkg)
    {
        if (accounts_.contains(pkg.address)) {
            throw DeployError(
                fmt::format("duplicate address {}", format_address(pkg.address)));
        }
        validate_package(pkg);
        Account account{pkg.address, pkg.balance, pkg.initial_storage, packages_->size()};
        accounts_.emplace(pkg.address, std::move(account));
        auto next = std::make_shared<std::vector<ContractPackage>>(*packages_);
        next->push_back(std::move(pkg));
        packages_ = std::move(next);
    }

    ContractPackage const *WorldState::package_at(Address a) const
    {
        auto const *acct = find(a);
        if (acct == nullptr || !acct->package) {
            return nullptr;
        }
        return &(*packages_)[*acct->package];
    }

    Word WorldState::balance(Address a) const
    {
        auto const *acct = find(a);
        return acct == nullptr ? 0 : acct->balance;
    }

    Word WorldState::total_balance() const
    {
        Word total = 0;
        for (auto const &[_, acct] : accounts_) {
            total += acct.balance;
        }
        return total;
    }

    Route WorldState::route(Address target, std::optional<Selector> selector) const
    {
        auto const *acct = find(target);
        if (acct == nullptr) {
            return {Route::Kind::Missing, nullptr};
        }
        if (!acct->package) {
            return {Route::Kind::NoCode, nullptr};
        }
        auto const &pkg = (*packages_)[*acct->package];
        if (selector) {
            if (auto const *f = pkg.find_selector(*selector)) {
                return {Route::Kind::Function, f};
            }
        }
        if (auto const *f = pkg.fallback()) {
            return {Route::Kind::Fallback, f};
        }
        return {Route::Kind::Unmatched, nullptr};
    }

    WorldState deploy(std::vector<ContractPackage> packages)
    {
        WorldState world;
        for (auto &pkg : packages) {
            world.install(std::move(pkg));
        }
        return world;
    }

    std::vector<std::uint8_t> encode_calldata(
        std::optional<Selector> selector, std::vector<Word> const &args)
    {
        std::vector<std::uint8_t> out;
        auto put = [&out](Word w) {
            for (int i = 7; i >= 0; --i) {
                out.push_back(static_cast<std::uint8_t>((w >> (8 * i)) & 0xFF));
            }
        };
        if (selector) {
            put(*selector);
        }
        for (auto w : args) {
            put(w);
        }
        return out;
    }
}
