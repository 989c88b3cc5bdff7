#include <cstdint>
#include <string>

#include <CLI11.hpp>

#include "msglmb/cli_io.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Merge/Split GLMB multitarget tracker"};
    app.require_subcommand(1);

    auto* sim = app.add_subcommand("simulate", "Generate a measurement file");
    std::string sim_spec, sim_out;
    std::int64_t sim_seed = 0;
    sim->add_option("--spec", sim_spec, "Scenario description file")->required();
    sim->add_option("--seed", sim_seed, "RNG seed")->required();
    sim->add_option("--out", sim_out, "Output frame file")->required();

    auto* track = app.add_subcommand("track", "Run the tracker on a frame file");
    std::string trk_frames, trk_config, trk_out;
    bool debug_tree = false;
    track->add_option("--frames", trk_frames, "Input frame file")->required();
    track->add_option("--config", trk_config, "Tracker configuration")->required();
    track->add_option("--out", trk_out, "Output directory")->required();
    track->add_flag("--debug-tree", debug_tree, "Also write pedigree tree.dot");

    CLI11_PARSE(app, argc, argv);

    if (sim->parsed())
        return msglmb::run_simulate(sim_spec, sim_out,
                                    static_cast<std::uint64_t>(sim_seed));
    return msglmb::run_track(trk_frames, trk_config, trk_out, debug_tree);
}
