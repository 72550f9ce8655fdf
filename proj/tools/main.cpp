#include <iostream>

#include "adaptive_rd/cli.hpp"

int main(int argc, char **argv)
{
    return adaptive_rd::run_cli(argc, argv, std::cout, std::cerr);
}
