#include <iostream>

#include "hql/cli.hpp"

int main(int argc, char** argv) { return hql::cli::run(argc, argv, std::cout, std::cerr); }
