#include "cartograf/harness.hpp"

int main(int argc, char** argv) { return cartograf::harness::cli_dispatch(argc, argv); }
