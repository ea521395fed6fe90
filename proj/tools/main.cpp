#include <xcfuzz/cli/commands.hpp>

#include <iostream>

int main(int argc, char **argv)
{
    xcfuzz::cli::configure_logging();
    std::vector<std::string> args(argv + 1, argv + argc);
    return xcfuzz::cli::run_cli(args, std::cout, std::cerr);
}
