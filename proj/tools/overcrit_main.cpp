#include "overcrit/cli.hpp"

int main(int argc, char** argv)
{
    return overcrit::cli_main(argc, argv);
}
