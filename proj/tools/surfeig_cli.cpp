#include "surfeig/cli.hpp"

int main(int argc, char** argv) { return surfeig::run(argc, argv); }
