#include <doctest.h>

TEST_SUITE("algebra") {}
