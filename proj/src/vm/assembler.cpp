#include <xcfuzz/vm/assembler.hpp>

#include <fmt/format.h>

#include <cctype>
#include <charconv>
#include <optional>
#include <variant>

namespace xcfuzz::vm
{
    namespace
    {
        struct LabelRef
        {
            std::string name;
        };

        struct Item
        {
            Opcode op;
            std::variant<std::monostate, Word, LabelRef> operand;
            std::size_t line;
        };

        std::string_view trim(std::string_view s)
        {
            while (!s.empty() &&
                   std::isspace(static_cast<unsigned char>(s.front()))) {
                s.remove_prefix(1);
            }
            while (!s.empty() &&
                   std::isspace(static_cast<unsigned char>(s.back()))) {
                s.remove_suffix(1);
            }
            return s;
        }

        bool valid_label(std::string_view name)
        {
            if (name.empty() ||
                std::isdigit(static_cast<unsigned char>(name.front()))) {
                return false;
            }
            for (auto c : name) {
                if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' &&
                    c != '.' && c != '$') {
                    return false;
                }
            }
            return true;
        }

        // Parses an unsigned literal. Returns nullopt when it does not fit in
        // 64 bits; throws on malformed text.
        std::optional<Word> parse_literal(std::string_view text, std::size_t line)
        {
            int base = 10;
            if (text.starts_with("0x") || text.starts_with("0X")) {
                base = 16;
                text.remove_prefix(2);
            }
            if (text.empty()) {
                throw AssemblyError("empty numeric literal", line);
            }
            Word value = 0;
            auto const [ptr, ec] =
                std::from_chars(text.data(), text.data() + text.size(), value, base);
            if (ec == std::errc::result_out_of_range) {
                return std::nullopt;
            }
            if (ec != std::errc{} || ptr != text.data() + text.size()) {
                throw AssemblyError(
                    fmt::format("malformed immediate '{}'", text), line);
            }
            return value;
        }

        std::size_t width_of(Word value)
        {
            std::size_t width = 1;
            while (width < 8 && (value >> (8 * width)) != 0) {
                ++width;
            }
            return width;
        }

        Opcode push_of_width(std::size_t width)
        {
            return static_cast<Opcode>(
                static_cast<std::uint8_t>(Opcode::PUSH1) + width - 1);
        }

        void parse_statement(
            std::string_view stmt, std::size_t line, std::vector<Item> &items,
            std::map<std::string, std::size_t, std::less<>> &label_lines,
            std::vector<std::pair<std::string, std::size_t>> &label_defs)
        {
            stmt = trim(stmt);
            while (!stmt.empty()) {
                auto const colon = stmt.find(':');
                auto const space = stmt.find_first_of(" \t");
                if (colon == std::string_view::npos ||
                    (space != std::string_view::npos && space < colon)) {
                    break;
                }
                auto const name = trim(stmt.substr(0, colon));
                if (!valid_label(name)) {
                    throw AssemblyError(
                        fmt::format("invalid label name '{}'", name), line);
                }
                if (label_lines.contains(name)) {
                    throw AssemblyError(
                        fmt::format("duplicate label '{}'", name), line);
                }
                label_lines.emplace(std::string(name), line);
                // Label addresses are the index of the next item.
                label_defs.emplace_back(std::string(name), items.size());
                stmt = trim(stmt.substr(colon + 1));
            }
            if (stmt.empty()) {
                return;
            }

            if (stmt.front() == '@') {
                auto const name = stmt.substr(1);
                if (!valid_label(name)) {
                    throw AssemblyError(
                        fmt::format("invalid label reference '{}'", stmt), line);
                }
                items.push_back({Opcode::PUSH2, LabelRef{std::string(name)}, line});
                return;
            }

            auto const split = stmt.find_first_of(" \t");
            auto const mnemonic = stmt.substr(0, split);
            auto const operand = split == std::string_view::npos
                                     ? std::string_view{}
                                     : trim(stmt.substr(split));

            bool const bare_push = mnemonic == "PUSH" || mnemonic == "push";
            std::optional<OpcodeInfo> entry;
            if (!bare_push) {
                entry = lookup(mnemonic);
                if (!entry) {
                    throw AssemblyError(
                        fmt::format("unknown mnemonic '{}'", mnemonic), line);
                }
            }

            if (!bare_push && entry->immediate_bytes == 0) {
                if (operand.empty()) {
                    items.push_back({entry->op, std::monostate{}, line});
                    return;
                }
                bool const jump =
                    entry->op == Opcode::JUMP || entry->op == Opcode::JUMPI;
                if (jump && operand.front() == '@') {
                    auto const name = operand.substr(1);
                    if (!valid_label(name)) {
                        throw AssemblyError(
                            fmt::format("invalid label reference '{}'", operand),
                            line);
                    }
                    items.push_back(
                        {Opcode::PUSH2, LabelRef{std::string(name)}, line});
                    items.push_back({entry->op, std::monostate{}, line});
                    return;
                }
                throw AssemblyError(
                    fmt::format("{} takes no operand", entry->mnemonic), line);
            }

            if (operand.empty()) {
                throw AssemblyError(
                    fmt::format("{} requires an immediate", mnemonic), line);
            }
            if (operand.front() == '@') {
                auto const name = operand.substr(1);
                if (!valid_label(name)) {
                    throw AssemblyError(
                        fmt::format("invalid label reference '{}'", operand), line);
                }
                auto const op = bare_push ? Opcode::PUSH2 : entry->op;
                items.push_back({op, LabelRef{std::string(name)}, line});
                return;
            }
            auto const value = parse_literal(operand, line);
            if (!value) {
                throw AssemblyError(
                    fmt::format("immediate overflow: '{}'", operand), line);
            }
            if (bare_push) {
                items.push_back({push_of_width(width_of(*value)), *value, line});
                return;
            }
            if (width_of(*value) > entry->immediate_bytes) {
                throw AssemblyError(
                    fmt::format(
                        "immediate overflow: '{}' does not fit in {} byte(s)",
                        operand,
                        entry->immediate_bytes),
                    line);
            }
            items.push_back({entry->op, *value, line});
        }
    }

    Assembly assemble_program(std::string_view source)
    {
        std::vector<Item> items;
        std::map<std::string, std::size_t, std::less<>> label_lines;
        std::vector<std::pair<std::string, std::size_t>> label_defs;

        std::size_t line_no = 0;
        std::size_t pos = 0;
        while (pos <= source.size()) {
            auto const end = source.find('\n', pos);
            auto line = source.substr(
                pos, end == std::string_view::npos ? source.size() - pos
                                                   : end - pos);
            ++line_no;
            if (auto const c = line.find(';'); c != std::string_view::npos) {
                line = line.substr(0, c);
            }
            std::size_t spos = 0;
            while (spos <= line.size()) {
                auto const slash = line.find('/', spos);
                auto const stmt = line.substr(
                    spos,
                    slash == std::string_view::npos ? line.size() - spos
                                                    : slash - spos);
                parse_statement(stmt, line_no, items, label_lines, label_defs);
                if (slash == std::string_view::npos) {
                    break;
                }
                spos = slash + 1;
            }
            if (end == std::string_view::npos) {
                break;
            }
            pos = end + 1;
        }

        // Widths are fixed before label resolution, so offsets are final.
        std::vector<std::size_t> offsets(items.size() + 1, 0);
        for (std::size_t i = 0; i < items.size(); ++i) {
            offsets[i + 1] = offsets[i] + 1 + info(items[i].op).immediate_bytes;
        }

        Assembly result;
        for (auto const &[name, index] : label_defs) {
            result.labels.emplace(name, offsets[index]);
        }

        result.code.reserve(offsets.back());
        for (auto const &item : items) {
            auto const &entry = info(item.op);
            result.code.push_back(static_cast<std::uint8_t>(item.op));
            if (entry.immediate_bytes == 0) {
                continue;
            }
            Word value = 0;
            if (auto const *ref = std::get_if<LabelRef>(&item.operand)) {
                auto const it = result.labels.find(ref->name);
                if (it == result.labels.end()) {
                    throw AssemblyError(
                        fmt::format("undefined label '{}'", ref->name), item.line);
                }
                value = it->second;
                if (width_of(value) > entry.immediate_bytes) {
                    throw AssemblyError(
                        fmt::format(
                            "immediate overflow: label '{}' at {} does not fit",
                            ref->name,
                            value),
                        item.line);
                }
            }
            else {
                value = std::get<Word>(item.operand);
            }
            for (std::size_t i = entry.immediate_bytes; i-- > 0;) {
                result.code.push_back(
                    static_cast<std::uint8_t>((value >> (8 * i)) & 0xFF));
            }
        }
        return result;
    }
}
