#include "glhnn/cli.hpp"

int main(int argc, char** argv) { return glhnn::cli::run(argc, argv); }
