// dimerlab command-line driver (subcommands are filled in as modules land)
#include <cstdio>

int main(int argc, char** argv) {
  (void)argc;
  (void)argv;
  std::fprintf(stderr, "dimerlab: command-line interface not wired up yet\n");
  return 2;
}
