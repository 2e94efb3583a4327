// main.cpp — parosc command-line interface (stub; subcommands added with the modules)
#include <cstdio>

int main() {
    std::puts("parosc: not yet wired");
    return 2;
}
