#pragma once

#include <xcfuzz/vm/world.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace xcfuzz::cli
{
    inline constexpr std::string_view manifest_schema = "xcfuzz-manifest/1";
    inline constexpr std::string_view manifest_suffix = ".manifest.json";

    class ManifestError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // Manifest document (one per contract):
    //
    //   {
    //     "schema": "xcfuzz-manifest/1",
    //     "name": "Wallet",
    //     "address": "0x000000000000a001",
    //     "codeFile": "wallet.asm",          .asm is assembled, .hex decoded
    //     "balance": 100,
    //     "initialStorage": {"0x0": "0x2a"},
    //     "functions": [{
    //       "name": "withdraw", "selector": "0xf3fef3a3",
    //       "entryLabel": "withdraw",          or "entryPc": 12
    //       "params": ["address", "uint"],
    //       "isPublic": true, "hasModifier": false, "isFallback": false,
    //       "calls": ["Other.function"]
    //     }]
    //   }
    //
    // Paths are relative to the manifest's directory.

    /// Parses and validates one manifest. Throws ManifestError with the
    /// file (and line, for assembly errors) in the message.
    vm::ContractPackage load_manifest(std::filesystem::path const &manifest);

    /// Every *.manifest.json in `dir`, in file-name order.
    std::vector<vm::ContractPackage> ingest(std::filesystem::path const &dir);

    /// Writes <name>.manifest.json and <name>.hex into `dir`; ingest() of
    /// the result reproduces `pkg`.
    void emit(vm::ContractPackage const &pkg, std::filesystem::path const &dir);

    vm::Word parse_word(std::string const &text);
}
