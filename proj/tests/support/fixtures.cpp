#include "support/fixtures.hpp"

#include <xcfuzz/cli/manifest.hpp>

#include <stdexcept>
#include <string>

namespace xcfuzz::testing
{
    std::filesystem::path fixture_dir(std::string_view name)
    {
        return std::filesystem::path(XCFUZZ_FIXTURE_DIR) / std::string(name);
    }

    std::vector<vm::ContractPackage> load_fixture(std::string_view name)
    {
        return cli::ingest(fixture_dir(name));
    }

    vm::ContractPackage const &package_named(std::vector<vm::ContractPackage> const &pkgs,
                                             std::string_view name)
    {
        for (auto const &p : pkgs) {
            if (p.name == name) {
                return p;
            }
        }
        throw std::out_of_range("no package " + std::string(name));
    }

    vm::FunctionDescriptor const &function_named(vm::ContractPackage const &pkg,
                                                 std::string_view name)
    {
        auto const *f = pkg.find_function(name);
        if (f == nullptr) {
            throw std::out_of_range("no function " + std::string(name));
        }
        return *f;
    }

    vm::WorldState fixture_world(std::vector<vm::ContractPackage> const &pkgs)
    {
        auto world = vm::deploy(pkgs);
        world.add_account(fixture_attacker, 1000);
        return world;
    }

    vm::TransactionRequest attacker_tx(vm::Address target, std::optional<vm::Selector> selector,
                                       std::vector<vm::Word> args, vm::Word value)
    {
        vm::TransactionRequest tx;
        tx.caller = fixture_attacker;
        tx.origin = fixture_attacker;
        tx.target = target;
        tx.selector = selector;
        tx.args = std::move(args);
        tx.value = value;
        return tx;
    }
}
