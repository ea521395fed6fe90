#include <xcfuzz/cli/manifest.hpp>

#include <xcfuzz/cli/files.hpp>
#include <xcfuzz/vm/assembler.hpp>

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <map>

namespace xcfuzz::cli
{
    using nlohmann::json;

    vm::Word parse_word(std::string const &text)
    {
        std::size_t used = 0;
        unsigned long long v = 0;
        try {
            if (text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
                if (text.size() > 18) {
                    throw std::out_of_range(text);
                }
                v = std::stoull(text.substr(2), &used, 16);
                used += 2;
            }
            else {
                v = std::stoull(text, &used, 10);
            }
        }
        catch (std::exception const &) {
            throw std::invalid_argument(fmt::format("invalid number '{}'", text));
        }
        if (used != text.size()) {
            throw std::invalid_argument(fmt::format("invalid number '{}'", text));
        }
        return v;
    }

    namespace
    {
        vm::Word word_field(json const &j)
        {
            if (j.is_number_unsigned()) {
                return j.get<vm::Word>();
            }
            if (j.is_string()) {
                return parse_word(j.get<std::string>());
            }
            throw std::invalid_argument("expected a number or hex string");
        }

        template <typename T>
        T optional_field(json const &j, char const *key, T fallback)
        {
            return j.contains(key) ? j.at(key).get<T>() : fallback;
        }

        std::string hex_word(vm::Word w)
        {
            return fmt::format("0x{:x}", w);
        }
    }

    vm::ContractPackage load_manifest(std::filesystem::path const &manifest)
    {
        auto const where = manifest.string();
        auto fail = [&](std::string const &msg) -> ManifestError {
            return ManifestError(fmt::format("{}: {}", where, msg));
        };

        json doc;
        try {
            doc = json::parse(read_text(manifest));
        }
        catch (json::parse_error const &e) {
            throw fail(fmt::format("invalid JSON: {}", e.what()));
        }
        catch (std::runtime_error const &e) {
            throw ManifestError(e.what());
        }

        vm::ContractPackage pkg;
        std::map<std::string, std::size_t, std::less<>> labels;
        try {
            if (doc.value("schema", std::string{}) != manifest_schema) {
                throw fail(fmt::format("schema must be \"{}\"", manifest_schema));
            }
            pkg.name = doc.at("name").get<std::string>();
            pkg.address = word_field(doc.at("address"));
            pkg.balance = doc.contains("balance") ? word_field(doc.at("balance")) : 0;
            if (doc.contains("initialStorage")) {
                for (auto const &[k, v] : doc.at("initialStorage").items()) {
                    pkg.initial_storage[parse_word(k)] = word_field(v);
                }
            }

            auto const code_file = doc.at("codeFile").get<std::string>();
            auto const code_path = manifest.parent_path() / code_file;
            if (!std::filesystem::exists(code_path)) {
                throw fail(fmt::format("code file not found: {}", code_path.string()));
            }
            auto const source = read_text(code_path);
            if (code_path.extension() == ".asm") {
                try {
                    auto assembly = vm::assemble_program(source);
                    pkg.code = std::move(assembly.code);
                    labels = std::move(assembly.labels);
                }
                catch (vm::AssemblyError const &e) {
                    throw ManifestError(fmt::format("{}:{}: {}", code_path.string(), e.line(),
                                                    e.what()));
                }
            }
            else if (code_path.extension() == ".hex") {
                try {
                    pkg.code = vm::from_hex(source);
                }
                catch (std::exception const &e) {
                    throw ManifestError(fmt::format("{}: {}", code_path.string(), e.what()));
                }
            }
            else {
                throw fail(fmt::format("unsupported code file extension '{}'",
                                       code_path.extension().string()));
            }

            std::map<vm::Selector, std::string> selector_owner;
            for (auto const &f : doc.at("functions")) {
                vm::FunctionDescriptor d;
                d.name = f.at("name").get<std::string>();
                d.is_fallback = optional_field(f, "isFallback", false);
                d.is_public = optional_field(f, "isPublic", true);
                d.has_modifier = optional_field(f, "hasModifier", false);
                if (f.contains("selector") && !f.at("selector").is_null()) {
                    auto const s = word_field(f.at("selector"));
                    if (s > 0xFFFFFFFFull) {
                        throw fail(fmt::format("selector of '{}' exceeds 4 bytes", d.name));
                    }
                    d.selector = static_cast<vm::Selector>(s);
                    auto const [it, fresh] = selector_owner.emplace(*d.selector, d.name);
                    if (!fresh) {
                        throw fail(fmt::format("selector {} collides: '{}' and '{}'",
                                               vm::format_selector(*d.selector), it->second,
                                               d.name));
                    }
                }
                if (f.contains("entryLabel")) {
                    auto const label = f.at("entryLabel").get<std::string>();
                    auto const it = labels.find(label);
                    if (it == labels.end()) {
                        throw fail(fmt::format("function '{}': unknown entry label '{}'", d.name,
                                               label));
                    }
                    d.entry_pc = it->second;
                }
                else {
                    d.entry_pc = f.at("entryPc").get<std::size_t>();
                }
                for (auto const &p : f.value("params", json::array())) {
                    d.params.push_back(vm::param_kind_from_string(p.get<std::string>()));
                }
                for (auto const &c : f.value("calls", json::array())) {
                    d.declared_calls.push_back(c.get<std::string>());
                }
                pkg.functions.push_back(std::move(d));
            }
        }
        catch (ManifestError const &) {
            throw;
        }
        catch (std::exception const &e) {
            throw fail(e.what());
        }

        try {
            vm::validate_package(pkg);
        }
        catch (vm::DeployError const &e) {
            throw fail(e.what());
        }
        return pkg;
    }

    std::vector<vm::ContractPackage> ingest(std::filesystem::path const &dir)
    {
        if (!std::filesystem::is_directory(dir)) {
            throw ManifestError(fmt::format("{}: not a directory", dir.string()));
        }
        std::vector<std::filesystem::path> manifests;
        for (auto const &entry : std::filesystem::directory_iterator(dir)) {
            auto const name = entry.path().filename().string();
            if (entry.is_regular_file() && name.size() > manifest_suffix.size() &&
                name.ends_with(manifest_suffix)) {
                manifests.push_back(entry.path());
            }
        }
        std::sort(manifests.begin(), manifests.end());
        std::vector<vm::ContractPackage> out;
        for (auto const &m : manifests) {
            out.push_back(load_manifest(m));
        }
        return out;
    }

    void emit(vm::ContractPackage const &pkg, std::filesystem::path const &dir)
    {
        json doc;
        doc["schema"] = manifest_schema;
        doc["name"] = pkg.name;
        doc["address"] = vm::format_address(pkg.address);
        doc["codeFile"] = pkg.name + ".hex";
        doc["balance"] = pkg.balance;
        json storage = json::object();
        for (auto const &[k, v] : pkg.initial_storage) {
            storage[hex_word(k)] = hex_word(v);
        }
        doc["initialStorage"] = storage;
        json functions = json::array();
        for (auto const &f : pkg.functions) {
            json jf;
            jf["name"] = f.name;
            if (f.selector) {
                jf["selector"] = vm::format_selector(*f.selector);
            }
            jf["entryPc"] = f.entry_pc;
            json params = json::array();
            for (auto p : f.params) {
                params.push_back(std::string(vm::to_string(p)));
            }
            jf["params"] = params;
            jf["isPublic"] = f.is_public;
            jf["hasModifier"] = f.has_modifier;
            jf["isFallback"] = f.is_fallback;
            jf["calls"] = f.declared_calls;
            functions.push_back(jf);
        }
        doc["functions"] = functions;
        write_atomic(dir / (pkg.name + ".hex"), vm::to_hex(pkg.code) + "\n");
        write_atomic(dir / (pkg.name + std::string(manifest_suffix)), doc.dump(2) + "\n");
    }
}
