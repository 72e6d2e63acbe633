// Regenerates the committed golden logs under tests/golden/.
// Only needed when the log format changes on purpose:
//   build/coars_make_goldens tests/golden
#include <fstream>
#include <iostream>

#include "support/golden_episodes.hpp"

int main(int argc, char** argv) {
    std::string dir = argc > 1 ? argv[1] : "tests/golden";
    {
        std::ofstream f(dir + "/episodes.jsonl", std::ios::binary);
        if (!f) {
            std::cerr << "cannot write to " << dir << "\n";
            return 1;
        }
        f << golden::episodes_jsonl();
    }
    {
        std::ofstream f(dir + "/replay.txt", std::ios::binary);
        f << golden::replay_txt();
    }
    std::cout << "wrote " << dir << "/episodes.jsonl and " << dir << "/replay.txt\n";
    return 0;
}
