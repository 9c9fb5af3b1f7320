#include "deepbarrier/cli.hpp"

int main(int argc, char** argv) { return deepbarrier::dispatch(argc, argv); }
