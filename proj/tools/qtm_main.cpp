#include <iostream>

#include "qtm/cli.hpp"

int main(int argc, char** argv) {
    try {
        std::string help;
        const qtm::RunConfig cfg =
            qtm::parse_args({argv + 1, argv + argc}, &help);
        if (cfg.command == "help") {
            std::cout << help;
            return 0;
        }
        return qtm::run(cfg);
    } catch (const qtm::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const qtm::UnmatchedLargest& e) {
        std::cerr << "finding: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
