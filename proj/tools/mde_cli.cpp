#include "cli_app.hpp"

int main(int argc, char** argv) { return mde::cli::run(argc, argv); }
