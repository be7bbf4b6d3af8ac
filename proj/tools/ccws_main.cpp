#include "commands.hpp"

int main(int argc, char** argv) { return ccws::cli::run(argc, argv); }
