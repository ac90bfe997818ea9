#include <cstdio>

int main() {
    std::puts("sadic: experiment runner not wired up yet");
    return 2;
}
