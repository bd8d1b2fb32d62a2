#include "guitest/cli.hpp"

int main(int argc, char** argv) {
    return guitest::run_main(std::vector<std::string>(argv, argv + argc));
}
