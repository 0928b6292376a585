#include "kidlex/cli.hpp"

int main(int argc, char** argv) { return kidlex::cli::dispatch(argc, argv); }
