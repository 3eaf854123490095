#include "mwtcs/cli.hpp"

int main(int argc, char** argv) { return mwtcs::cli::dispatch(argc, argv); }
