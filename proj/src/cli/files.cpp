#include <xcfuzz/cli/files.hpp>

#include <fmt/format.h>

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace xcfuzz::cli
{
    std::string read_text(std::filesystem::path const &path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            throw std::runtime_error(fmt::format("{}: cannot open file", path.string()));
        }
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    void write_atomic(std::filesystem::path const &path, std::string_view content)
    {
        auto tmp = path;
        tmp += ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) {
                throw std::runtime_error(fmt::format("{}: cannot write file", tmp.string()));
            }
            out.write(content.data(), static_cast<std::streamsize>(content.size()));
            out.flush();
            if (!out) {
                std::filesystem::remove(tmp);
                throw std::runtime_error(fmt::format("{}: write failed", tmp.string()));
            }
        }
        std::error_code ec;
        std::filesystem::rename(tmp, path, ec);
        if (ec) {
            std::filesystem::remove(tmp);
            throw std::runtime_error(
                fmt::format("{}: cannot replace file: {}", path.string(), ec.message()));
        }
    }
}
