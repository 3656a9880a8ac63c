#include <iostream>
#include <string>
#include <vector>

#include "pathlift/cli.hpp"

int main(int argc, char** argv) {
  return pathlift::dispatch(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
