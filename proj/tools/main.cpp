#include <string>
#include <vector>

#include "pothole/cli.hpp"

int main(int argc, char** argv)
{
    std::vector<std::string> args(argv, argv + argc);
    return pothole::cli::run_cli(args);
}
