#include "mrwlab/cli.hpp"

int main(int argc, char** argv) { return mrw::cli::run(argc, argv); }
