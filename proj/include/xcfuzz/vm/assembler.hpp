#pragma once

#include <xcfuzz/vm/opcode.hpp>

#include <cstddef>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace xcfuzz::vm
{
    class AssemblyError : public std::runtime_error
    {
    public:
        AssemblyError(std::string const &message, std::size_t line)
            : std::runtime_error(
                  "line " + std::to_string(line) + ": " + message)
            , line_(line)
        {
        }

        std::size_t line() const
        {
            return line_;
        }

    private:
        std::size_t line_;
    };

    struct Assembly
    {
        std::vector<std::uint8_t> code;
        std::map<std::string, std::size_t, std::less<>> labels;
    };

    // Text format, one instruction per line (a '/' also separates
    // instructions), ';' starts a comment:
    //
    //   loop:            label definition (does not emit JUMPDEST)
    //   PUSH1 0x05       explicit width, hex or decimal immediate
    //   PUSH 300         smallest width that fits
    //   PUSH2 @loop      label address as immediate
    //   @loop            shorthand for PUSH2 @loop
    //   JUMPI @loop      shorthand for PUSH2 @loop / JUMPI
    Assembly assemble_program(std::string_view source);

    inline std::vector<std::uint8_t> assemble(std::string_view source)
    {
        return assemble_program(source).code;
    }
}
