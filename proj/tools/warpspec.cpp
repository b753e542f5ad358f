// warpspec: compile tile-level kernels into warp-specialized programs and
// evaluate them on a simulated Hopper-like SM.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include <warpspec/driver.hpp>

using namespace warpspec;

namespace {

void add_common(CLI::App* cmd, RunSpec& spec, std::string& mode_str) {
    cmd->add_option("--kernel", spec.kernel_path, "kernel source (.k)")->required();
    cmd->add_option("--machine", spec.machine_path, "machine config (key = value lines)");
    cmd->add_option("-D,--depth", spec.d, "aref channel depth (cyclic buffer slots)");
    cmd->add_option("-P,--pipeline", spec.p, "max in-flight MMA issue groups");
    cmd->add_option("--mode", mode_str, "pipeline mode: auto|fine|coarse|none")
        ->check(CLI::IsMember({"auto", "fine", "coarse", "none"}));
    cmd->add_option("--coop-wgs", spec.coop_wgs, "cooperative consumer warp groups");
    cmd->add_flag("--persistent", spec.persistent, "resident CTAs over a tile work queue");
    cmd->add_option("--tiles", spec.tiles, "output tiles in the work queue");
    cmd->add_option("--trace-out", spec.trace_out, "write the trace JSON here");
    cmd->add_option("--listing-out", spec.listing_out, "write the lowered listing here");
    cmd->add_flag("--gantt", spec.want_gantt, "print a unit timeline");
    cmd->add_flag("--literal-prologue", spec.literal_prologue,
                  "emit the printed-algorithm prologue (computes C0 twice)");
    cmd->add_flag("--test-drop-consumed", spec.test_drop_consumed,
                  "test hook: delete slot releases to demonstrate deadlock detection")
        ->group("");  // hidden
}

MachineConfig machine_for(const RunSpec& spec) {
    return spec.machine_path.empty() ? MachineConfig{} : load_machine_config(spec.machine_path);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"warp-specializing tile kernel compiler and simulator"};
    app.require_subcommand(1);

    RunSpec spec;
    spec.seed = env_seed();
    std::string mode_str = "auto";

    auto* compile = app.add_subcommand("compile", "lower a kernel and print the listing");
    add_common(compile, spec, mode_str);

    auto* run = app.add_subcommand("run", "compile, simulate, and check against the oracle");
    add_common(run, spec, mode_str);

    auto* sweep = app.add_subcommand("sweep", "cycle counts over a D x P x persistence grid");
    add_common(sweep, spec, mode_str);
    int d_lo = 1, d_hi = 3, p_lo = 1, p_hi = 3;
    sweep->add_option("--d-lo", d_lo, "first channel depth");
    sweep->add_option("--d-hi", d_hi, "last channel depth");
    sweep->add_option("--p-lo", p_lo, "first pipeline depth");
    sweep->add_option("--p-hi", p_hi, "last pipeline depth");

    auto* ablate = app.add_subcommand("ablate", "run the optimization ladder");
    add_common(ablate, spec, mode_str);
    AblateOptions ab;
    ablate->add_option("--large-kernel", ab.large_kernel_path,
                       "larger-tile variant used by the cooperative rung");
    ablate->add_option("--large-tiles", ab.large_tiles, "tile count for the large variant");

    CLI11_PARSE(app, argc, argv);
    spec.mode = parse_pipeline_mode(mode_str);

    try {
        if (app.got_subcommand(compile)) {
            MachineConfig mc = machine_for(spec);
            CompileOutput co = cmd_compile(spec, mc);
            std::string listing = print_lowered(co.module);
            if (spec.listing_out.empty()) std::cout << listing;
            std::cout << "mode: " << co.mode_applied << "\n";
            std::cout << "compiled: " << co.module.streams.size() << " warp groups, "
                      << co.module.barriers.size() << " barriers, smem "
                      << co.module.smem_total << " bytes\n";
        } else if (app.got_subcommand(run)) {
            MachineConfig mc = machine_for(spec);
            RunOutput out = cmd_run(spec, mc);
            std::cout << format_summary(out);
            if (spec.want_gantt) std::cout << gantt(out.trace, out.cycles);
        } else if (app.got_subcommand(sweep)) {
            MachineConfig mc = machine_for(spec);
            std::cout << cmd_sweep(spec, mc, d_lo, d_hi, p_lo, p_hi);
        } else if (app.got_subcommand(ablate)) {
            MachineConfig mc = machine_for(spec);
            std::cout << cmd_ablate(spec, mc, ab);
        }
    } catch (const CompileError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
