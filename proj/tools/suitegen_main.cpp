// Writes the standard scenario suite, the default config, the default
// tuning grid and the caravan scenario as JSON documents.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "vfence/io.hpp"
#include "vfence/suite.hpp"

namespace fs = std::filesystem;

namespace {

void write(const fs::path& path, const vfence::Json& doc)
{
    std::ofstream out(path);
    out << doc.dump(2) << '\n';
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Generate the standard scenario suite and default documents", "vfence_suitegen"};
    std::string out_dir = "data";
    vfence::StandardSuiteOptions options;
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--seed", options.seed, "Suite layout seed");
    CLI11_PARSE(app, argc, argv);

    try {
        const fs::path root(out_dir);
        fs::create_directories(root);

        const auto suite = vfence::standard_suite(options);
        vfence::Json index = {{"scenarios", vfence::Json::array()}};
        for (const auto& s : suite) {
            const auto file = s.name + ".json";
            write(root / file, vfence::to_json(s.spec));
            index["scenarios"].push_back({{"name", s.name}, {"path", file}});
        }
        write(root / "standard_suite.json", index);
        write(root / "caravan.json", vfence::to_json(vfence::caravan_scenario()));
        write(root / "default_config.json", vfence::to_json(vfence::RunConfig{}));
        write(root / "default_grid.json", vfence::to_json(vfence::default_param_grid()));
        write(root / "sounds.json", vfence::to_json(vfence::default_sound_pool()));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
