#include <doctest.h>

TEST_SUITE("models") {}
