// Command-line front end: plan a minimum-time survey trajectory from a JSON
// spec, or compare the optimized planner against the rest-to-rest baseline.
#include "aerosurvey/survey_io.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace
{

struct Overrides
{
    std::optional<std::string> out_dir;
    std::optional<double> sample_rate_hz;
    bool no_smooth = false;
    bool waypoints_only = false;
    std::optional<std::string> tolerance_profile;
};

void add_common_options(CLI::App *cmd, std::string &spec_path, Overrides &ov)
{
    cmd->add_option("spec", spec_path, "Path to the survey spec (JSON)")->required();
    cmd->add_option("--out-dir", ov.out_dir, "Directory for output artifacts");
    cmd->add_option("--sample-rate", ov.sample_rate_hz,
                    "CSV sample rate in Hz (1 to 1000)");
    cmd->add_flag("--no-smooth", ov.no_smooth, "Skip the quartic smoothing pass");
    cmd->add_flag("--waypoints-only", ov.waypoints_only,
                  "Generate the capture grid and stop before solving");
    cmd->add_option("--tolerance-profile", ov.tolerance_profile,
                    "Audit tolerance profile")
        ->check(CLI::IsMember({"default", "strict"}));
}

int load_and_apply(const std::string &spec_path, const Overrides &ov,
                   aerosurvey::SurveySpec &spec)
{
    try
    {
        spec = aerosurvey::SurveySpec::load(spec_path);
    }
    catch (const aerosurvey::InvalidParameterError &err)
    {
        std::cerr << "spec error: " << err.what() << "\n";
        return static_cast<int>(aerosurvey::RunStatus::spec_error);
    }
    if (ov.out_dir)
        spec.out_dir = *ov.out_dir;
    if (ov.sample_rate_hz)
        spec.sample_rate_hz = *ov.sample_rate_hz;
    if (ov.no_smooth)
        spec.smooth = false;
    if (ov.waypoints_only)
        spec.waypoints_only = true;
    if (ov.tolerance_profile)
        spec.profile = (*ov.tolerance_profile == "strict")
                           ? aerosurvey::ToleranceProfile::strict
                           : aerosurvey::ToleranceProfile::standard;
    return 0;
}

int run_plan(const std::string &spec_path, const Overrides &ov)
{
    aerosurvey::SurveySpec spec;
    if (int code = load_and_apply(spec_path, ov, spec); code != 0)
        return code;

    const aerosurvey::RunResult result = aerosurvey::run_survey(spec);
    if (result.solved)
        std::cout << "total time: " << result.total_time << " s\n";
    for (const std::string &name : result.artifacts)
        std::cout << "wrote " << spec.out_dir << "/" << name << "\n";
    if (result.status == aerosurvey::RunStatus::ok)
        std::cout << result.message << "\n";
    else
        std::cerr << "error: " << result.message << "\n";
    return static_cast<int>(result.status);
}

int run_compare(const std::string &spec_path, const Overrides &ov)
{
    aerosurvey::SurveySpec spec;
    if (int code = load_and_apply(spec_path, ov, spec); code != 0)
        return code;

    const aerosurvey::CompareResult result = aerosurvey::compare_survey(spec);
    std::cout << result.table();
    if (result.rows.size() == 2 && result.rows[0].solved && result.rows[1].solved)
        std::cout << "relative delta: " << result.relative_delta * 100.0 << " %\n";
    if (result.status != aerosurvey::RunStatus::ok)
        std::cerr << "error: " << result.message << "\n";
    return static_cast<int>(result.status);
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Minimum-time aerial survey trajectory planner"};
    app.require_subcommand(1);

    std::string plan_spec;
    Overrides plan_ov;
    CLI::App *plan_cmd =
        app.add_subcommand("plan", "Solve a survey spec and write trajectory artifacts");
    add_common_options(plan_cmd, plan_spec, plan_ov);

    std::string compare_spec;
    Overrides compare_ov;
    CLI::App *compare_cmd = app.add_subcommand(
        "compare", "Run optimized and baseline planners on the same spec");
    add_common_options(compare_cmd, compare_spec, compare_ov);

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (plan_cmd->parsed())
            return run_plan(plan_spec, plan_ov);
        return run_compare(compare_spec, compare_ov);
    }
    catch (const aerosurvey::InvalidParameterError &err)
    {
        std::cerr << "spec error: " << err.what() << "\n";
        return static_cast<int>(aerosurvey::RunStatus::spec_error);
    }
    catch (const aerosurvey::InfeasibleError &err)
    {
        std::cerr << "infeasible: " << err.what() << "\n";
        return static_cast<int>(aerosurvey::RunStatus::infeasible);
    }
    catch (const std::exception &err)
    {
        std::cerr << "internal error: " << err.what() << "\n";
        return static_cast<int>(aerosurvey::RunStatus::internal_error);
    }
}
