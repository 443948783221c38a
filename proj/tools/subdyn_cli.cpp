#include <subdyn/cli.hpp>

int main(int argc, char** argv)
{
    return subdyn::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
