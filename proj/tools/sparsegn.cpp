#include "sgn/cli.hpp"
#include "sgn/default_config.hpp"

int main(int argc, char** argv) { return sgn::run_cli(argc, argv, sgn::default_config_text); }
