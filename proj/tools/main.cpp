#include "cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
  try {
    const auto config = ersdp::cli::parse_config(argc, argv);
    return ersdp::cli::run(config);
  } catch (const ersdp::cli::ConfigError& e) {
    if (e.exit_code() == 0) {
      std::cout << (e.usage().empty() ? std::string(e.what()) + "\n" : e.usage());
      return 0;
    }
    std::cerr << "ersdp: " << e.what() << "\n\n" << e.usage();
    return e.exit_code();
  }
}
