#include "selfnorm/cli.hpp"

int main(int argc, char** argv) { return selfnorm::cli_main(argc, argv); }
