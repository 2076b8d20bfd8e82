#include "app.hpp"

int main(int argc, char** argv) { return qgphase::cli::main_entry(argc, argv); }
