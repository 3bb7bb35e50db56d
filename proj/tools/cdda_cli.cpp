#include "cdda/experiment.hpp"

int main(int argc, char** argv) { return cdda::experiment::cli_main(argc, argv); }
