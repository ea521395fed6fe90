#pragma once

#include <xcfuzz/vm/opcode.hpp>

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace xcfuzz::vm
{
    enum class ParamKind : std::uint8_t
    {
        Uint,
        Address,
        Bytes,
        Array,
    };

    std::string_view to_string(ParamKind kind);
    ParamKind param_kind_from_string(std::string_view text);

    struct FunctionDescriptor
    {
        std::string name;
        std::optional<Selector> selector; // empty for the fallback
        std::size_t entry_pc = 0;
        std::vector<ParamKind> params;
        bool is_public = true;
        bool has_modifier = false;
        bool is_fallback = false;
        // "Contract.function" names of statically declared external callees.
        std::vector<std::string> declared_calls;

        bool operator==(FunctionDescriptor const &) const = default;
    };

    /// Bytecode plus manifest: the unit that gets deployed.
    struct ContractPackage
    {
        std::string name;
        Address address = 0;
        std::vector<std::uint8_t> code;
        std::vector<FunctionDescriptor> functions;
        Word balance = 0;
        std::map<Word, Word> initial_storage;

        FunctionDescriptor const *find_function(std::string_view fn) const;
        FunctionDescriptor const *find_selector(Selector s) const;
        FunctionDescriptor const *fallback() const;

        bool operator==(ContractPackage const &) const = default;
    };

    class DeployError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    /// Static checks on a package: decodable code, constant jump targets
    /// land on JUMPDEST, entry points are JUMPDESTs, distinct selectors,
    /// at most one parameterless fallback. Throws DeployError.
    void validate_package(ContractPackage const &pkg);

    struct Account
    {
        Address address = 0;
        Word balance = 0;
        std::map<Word, Word> storage;
        // Index into WorldState::packages(); empty for code-less accounts.
        std::optional<std::size_t> package;

        bool operator==(Account const &) const = default;
    };

    /// Where a call with the given calldata lands inside a contract.
    struct Route
    {
        enum class Kind : std::uint8_t
        {
            Function,
            Fallback,
            NoCode,
            Missing,
            Unmatched,
        };

        Kind kind = Kind::Missing;
        FunctionDescriptor const *function = nullptr;
    };

    class WorldState
    {
    public:
        WorldState() = default;

        Account const *find(Address a) const;
        Account *find(Address a);

        /// Adds a code-less account (an externally owned sender).
        void add_account(Address a, Word balance);

        /// Adds a contract; used by deploy() and the attacker harness.
        void install(ContractPackage pkg);

        std::vector<ContractPackage> const &packages() const
        {
            return *packages_;
        }

        std::map<Address, Account> const &accounts() const
        {
            return accounts_;
        }

        ContractPackage const *package_at(Address a) const;

        Word balance(Address a) const;
        Word total_balance() const;

        /// Selector dispatch: a present selector routes to its function,
        /// otherwise to the fallback if one exists.
        Route route(Address target, std::optional<Selector> selector) const;

        bool operator==(WorldState const &other) const
        {
            return *packages_ == *other.packages_ && accounts_ == other.accounts_;
        }

    private:
        // Code is immutable once installed; copies of a world share it.
        std::shared_ptr<std::vector<ContractPackage> const> packages_ =
            std::make_shared<std::vector<ContractPackage> const>();
        std::map<Address, Account> accounts_;
    };

    /// Deploys all packages: storage from initial_storage, balances from
    /// the manifest. Throws DeployError on duplicate addresses or invalid
    /// packages.
    WorldState deploy(std::vector<ContractPackage> packages);

    struct TransactionRequest
    {
        Address caller = 0;
        Address origin = 0;
        Address target = 0;
        std::optional<Selector> selector;
        std::vector<Word> args;
        Word value = 0;
        std::uint64_t step_budget = 100'000;

        bool operator==(TransactionRequest const &) const = default;
    };

    inline constexpr std::uint64_t default_step_budget = 100'000;

    /// Calldata layout: selector word (when present) followed by the
    /// argument words, 8 bytes each, big-endian.
    std::vector<std::uint8_t> encode_calldata(
        std::optional<Selector> selector, std::vector<Word> const &args);
}
