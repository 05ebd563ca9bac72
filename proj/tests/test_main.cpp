#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "stackcast/log.hpp"

// Pipeline stages narrate their progress; keep test output readable.
int main(int argc, char** argv) {
    stackcast::set_log_quiet(true);
    return doctest::Context(argc, argv).run();
}
