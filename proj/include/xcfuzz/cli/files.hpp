#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace xcfuzz::cli
{
    /// Throws std::runtime_error naming the path on failure.
    std::string read_text(std::filesystem::path const &path);

    /// Writes to a sibling temporary file, then renames it over `path`, so
    /// readers never observe a partial artifact.
    void write_atomic(std::filesystem::path const &path, std::string_view content);
}
