#pragma once

#include <xcfuzz/vm/world.hpp>

#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

namespace xcfuzz::testing
{
    std::filesystem::path fixture_dir(std::string_view name);

    /// Ingests tests/fixtures/<name>.
    std::vector<vm::ContractPackage> load_fixture(std::string_view name);

    vm::ContractPackage const &package_named(std::vector<vm::ContractPackage> const &pkgs,
                                             std::string_view name);

    vm::FunctionDescriptor const &function_named(vm::ContractPackage const &pkg,
                                                 std::string_view name);

    /// Attacker address used as owner/depositor in the fixtures.
    inline constexpr vm::Address fixture_attacker = 0xA77A;

    /// Deploys `pkgs` plus the attacker as a funded code-less account.
    vm::WorldState fixture_world(std::vector<vm::ContractPackage> const &pkgs);

    /// A transaction from the attacker (as caller and origin).
    vm::TransactionRequest attacker_tx(vm::Address target, std::optional<vm::Selector> selector,
                                       std::vector<vm::Word> args = {}, vm::Word value = 0);
}
