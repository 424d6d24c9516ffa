#include <iostream>

#include "lesion/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  return lesion::cli::run(args, {[](const std::string& s) {
                                   std::cout << s;
                                   if (s.empty() || s.back() != '\n') std::cout << '\n';
                                   std::cout.flush();
                                 },
                                 [](const std::string& s) { std::cerr << s << '\n'; }});
}
