#include <doctest.h>

TEST_SUITE("graph") {}
