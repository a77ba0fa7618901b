#include "aerosurvey/survey_io.hpp"

#include "aerosurvey/baseline_bang.hpp"
#include "aerosurvey/nlp_planner.hpp"
#include "aerosurvey/trajectory_kit.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace aerosurvey
{

namespace
{

using nlohmann::json;

constexpr double kDeg = M_PI / 180.0;

double require_number(const json &node, const char *field, const char *path)
{
    if (!node.contains(field) || !node[field].is_number())
    {
        std::ostringstream msg;
        msg << "spec field '" << path << "' must be a number";
        throw InvalidParameterError(msg.str());
    }
    return node[field].get<double>();
}

double optional_number(const json &node, const char *field, double fallback)
{
    if (!node.contains(field))
        return fallback;
    if (!node[field].is_number())
    {
        std::ostringstream msg;
        msg << "spec field '" << field << "' must be a number";
        throw InvalidParameterError(msg.str());
    }
    return node[field].get<double>();
}

bool optional_bool(const json &node, const char *field, bool fallback)
{
    if (!node.contains(field))
        return fallback;
    if (!node[field].is_boolean())
    {
        std::ostringstream msg;
        msg << "spec field '" << field << "' must be a boolean";
        throw InvalidParameterError(msg.str());
    }
    return node[field].get<bool>();
}

std::string format_number(double value)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", value);
    return buf;
}

} // namespace

void SurveySpec::validate() const
{
    if (roi_width_m < 0.0 || roi_height_m < 0.0)
        throw InvalidParameterError("spec field 'roi' must have nonnegative dimensions");
    if (altitude_m.has_value() == gsd_m_per_px.has_value())
        throw InvalidParameterError(
            "exactly one of 'altitude_m' and 'gsd_m_per_px' must be given");
    if (gsd_m_per_px && *gsd_m_per_px <= 0.0)
        throw InvalidParameterError("spec field 'gsd_m_per_px' must be positive");
    if (altitude_m && *altitude_m <= 0.0)
        throw InvalidParameterError("spec field 'altitude_m' must be positive");
    if (overlap_fraction < 0.0 || overlap_fraction >= 1.0)
        throw InvalidParameterError("spec field 'overlap_fraction' must lie in [0, 1)");
    if (sample_rate_hz < 1.0 || sample_rate_hz > 1000.0)
        throw InvalidParameterError(
            "spec field 'output.sample_rate_hz' must lie in [1, 1000]");
    if ((roi_width_m > 0.0 || roi_height_m > 0.0) && !camera_fov_given)
        throw InvalidParameterError(
            "spec block 'camera' must provide fov_h_deg and fov_v_deg for a "
            "non-degenerate region");
    planner.validate();
}

SurveySpec SurveySpec::from_json_text(const std::string &text)
{
    json doc;
    try
    {
        doc = json::parse(text);
    }
    catch (const json::parse_error &err)
    {
        throw InvalidParameterError(std::string("spec is not valid JSON: ") + err.what());
    }
    if (!doc.is_object())
        throw InvalidParameterError("spec root must be an object");

    SurveySpec spec;
    if (!doc.contains("roi") || !doc["roi"].is_object())
        throw InvalidParameterError("spec block 'roi' is required");
    spec.roi_width_m = require_number(doc["roi"], "width_m", "roi.width_m");
    spec.roi_height_m = require_number(doc["roi"], "height_m", "roi.height_m");

    if (doc.contains("altitude_m"))
        spec.altitude_m = require_number(doc, "altitude_m", "altitude_m");
    if (doc.contains("gsd_m_per_px"))
        spec.gsd_m_per_px = require_number(doc, "gsd_m_per_px", "gsd_m_per_px");
    spec.overlap_fraction = optional_number(doc, "overlap_fraction", 0.5);

    if (doc.contains("camera"))
    {
        const json &cam = doc["camera"];
        if (!cam.is_object())
            throw InvalidParameterError("spec block 'camera' must be an object");
        if (cam.contains("fov_h_deg") || cam.contains("fov_v_deg"))
        {
            spec.camera.fov_h_rad =
                require_number(cam, "fov_h_deg", "camera.fov_h_deg") * kDeg;
            spec.camera.fov_v_rad =
                require_number(cam, "fov_v_deg", "camera.fov_v_deg") * kDeg;
            spec.camera_fov_given = true;
        }
        if (cam.contains("allowable_blur_px") || cam.contains("shutter_s") ||
            cam.contains("ground_resolution_px_per_m"))
        {
            spec.camera.allowable_blur_px =
                require_number(cam, "allowable_blur_px", "camera.allowable_blur_px");
            spec.camera.ground_resolution_px_per_m =
                require_number(cam, "ground_resolution_px_per_m",
                               "camera.ground_resolution_px_per_m");
            spec.camera.shutter_s = require_number(cam, "shutter_s", "camera.shutter_s");
            spec.camera_blur_fields_given = true;
        }
        spec.camera.focal_length_m = optional_number(cam, "focal_length_m", 0.0);
        spec.camera.sensor_width_m = optional_number(cam, "sensor_width_m", 0.0);
        spec.camera.image_width_px = optional_number(cam, "image_width_px", 0.0);
    }

    if (doc.contains("planner"))
    {
        const json &pl = doc["planner"];
        if (!pl.is_object())
            throw InvalidParameterError("spec block 'planner' must be an object");
        spec.planner.u_max = require_number(pl, "u_max_mps2", "planner.u_max_mps2");
        spec.planner.v_axis_max =
            optional_number(pl, "v_axis_max_mps", spec.planner.v_axis_max);
        if (pl.contains("v_blur_mps"))
        {
            spec.planner.v_blur = require_number(pl, "v_blur_mps", "planner.v_blur_mps");
            spec.v_blur_given = true;
        }
        spec.planner.switching_points = static_cast<int>(
            optional_number(pl, "switching_points", spec.planner.switching_points));
        spec.planner.u_z_min = optional_number(pl, "u_z_min_mps2", spec.planner.u_z_min);
        spec.planner.eps_feas = optional_number(pl, "eps_feas", spec.planner.eps_feas);
        spec.planner.eps_opt = optional_number(pl, "eps_opt", spec.planner.eps_opt);
        spec.planner.eps_time = optional_number(pl, "eps_time", spec.planner.eps_time);
    }
    else
    {
        throw InvalidParameterError("spec block 'planner' is required (u_max_mps2)");
    }

    if (doc.contains("output"))
    {
        const json &out = doc["output"];
        spec.sample_rate_hz = optional_number(out, "sample_rate_hz", spec.sample_rate_hz);
        if (out.contains("directory"))
            spec.out_dir = out["directory"].get<std::string>();
    }

    if (doc.contains("mode"))
    {
        const json &mode = doc["mode"];
        spec.smooth = optional_bool(mode, "smooth", spec.smooth);
        spec.baseline = optional_bool(mode, "baseline", spec.baseline);
        spec.waypoints_only = optional_bool(mode, "waypoints_only", spec.waypoints_only);
        if (mode.contains("tolerance_profile"))
        {
            const std::string profile = mode["tolerance_profile"].get<std::string>();
            if (profile == "strict")
                spec.profile = ToleranceProfile::strict;
            else if (profile == "default")
                spec.profile = ToleranceProfile::standard;
            else
                throw InvalidParameterError(
                    "spec field 'mode.tolerance_profile' must be 'default' or 'strict'");
        }
    }

    return spec;
}

SurveySpec SurveySpec::load(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw InvalidParameterError("spec file is not readable: " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return from_json_text(text.str());
}

namespace
{

struct ResolvedInstance
{
    SurveyPlan plan;
    PlannerParams params;
    double altitude = 0.0;
};

ResolvedInstance resolve(const SurveySpec &spec)
{
    spec.validate();

    ResolvedInstance inst;
    inst.altitude = spec.altitude_m ? *spec.altitude_m
                                    : compute_flight_height(*spec.gsd_m_per_px, spec.camera);
    inst.params = spec.planner;
    if (!spec.v_blur_given && spec.camera_blur_fields_given)
        inst.params.v_blur = compute_v_blur(spec.camera);

    if (spec.roi_width_m > 0.0 && spec.roi_height_m > 0.0)
    {
        inst.plan = generate_lawnmower(spec.roi_width_m, spec.roi_height_m, inst.altitude,
                                       spec.overlap_fraction, spec.camera);
    }
    else if (spec.roi_width_m <= 0.0 && spec.roi_height_m <= 0.0)
    {
        // Zero-area region: a single hover point, kept as a degenerate pair.
        inst.plan.altitude_m = inst.altitude;
        inst.plan.allow_coincident = true;
        inst.plan.waypoints = {Vec3(0, 0, inst.altitude), Vec3(0, 0, inst.altitude)};
    }
    else
    {
        // One-dimensional strip: a single capture line along the live axis.
        const bool along_x = spec.roi_width_m > 0.0;
        const double extent = along_x ? spec.roi_width_m : spec.roi_height_m;
        const Footprint fp = compute_footprint(inst.altitude, spec.camera);
        const double spacing =
            std::max(1e-6, fp.width_m * (1.0 - spec.overlap_fraction));
        inst.plan.altitude_m = inst.altitude;
        inst.plan.capture_spacing_m = spacing;
        const int steps = std::max(1, static_cast<int>(std::ceil(extent / spacing - 1e-9)));
        for (int i = 0; i < steps; ++i)
        {
            const double a = i * spacing;
            inst.plan.waypoints.push_back(along_x ? Vec3(a, 0, inst.altitude)
                                                  : Vec3(0, a, inst.altitude));
        }
        inst.plan.waypoints.push_back(along_x ? Vec3(extent, 0, inst.altitude)
                                              : Vec3(0, extent, inst.altitude));
    }
    return inst;
}

json waypoints_document(const ResolvedInstance &inst,
                        const std::vector<double> *times)
{
    json wps = json::array();
    for (const Vec3 &w : inst.plan.waypoints)
        wps.push_back({w.x(), w.y(), w.z()});
    json doc = {{"altitude_m", inst.altitude},
                {"line_spacing_m", inst.plan.line_spacing_m},
                {"capture_spacing_m", inst.plan.capture_spacing_m},
                {"count", inst.plan.waypoints.size()},
                {"waypoints", wps}};
    if (times != nullptr)
        doc["scheduled_times_s"] = *times;
    return doc;
}

json report_document(const AuditReport &report, ToleranceProfile profile)
{
    json doc = {
        {"profile", profile == ToleranceProfile::strict ? "strict" : "default"},
        {"passed", report.passed},
        {"total_time_s", report.total_time},
        {"families",
         {{"max_waypoint_error_m", report.max_waypoint_error},
          {"max_blur_excess_mps", report.max_blur_excess},
          {"max_axis_speed_excess_mps", report.max_axis_speed_excess},
          {"max_input_excess_mps2", report.max_input_excess},
          {"max_continuity_gap", report.max_continuity_gap},
          {"reintegration_gap_m", report.reintegration_gap}}},
        {"waypoint_errors_m", report.waypoint_error_m},
        {"waypoint_speeds_mps", report.waypoint_speed},
        {"failures", report.failures}};
    if (report.has_baseline)
        doc["baseline"] = {{"total_time_s", report.baseline_time},
                           {"delta_s", report.delta_time}};
    return doc;
}

void write_text(const std::filesystem::path &path, const std::string &text,
                std::vector<std::string> &artifacts)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write artifact " + path.string());
    out << text;
    artifacts.push_back(path.filename().string());
}

template <typename Trajectory>
void append_plot_rows(std::ostream &out, const char *method, const Trajectory &traj,
                      double rate_hz)
{
    const double duration = traj.duration();
    const double step = 1.0 / rate_hz;
    const long rows = static_cast<long>(std::floor(duration / step + 1e-9));
    for (long i = 0; i <= rows; ++i)
    {
        const double t = std::min(i * step, duration);
        const SampleState s = sample(traj, t);
        out << method << ',' << format_number(t) << ',' << format_number(s.r.x()) << ','
            << format_number(s.r.y()) << ',' << format_number(s.r.z()) << ','
            << format_number(s.v.norm()) << ',' << format_number(s.a.norm()) << '\n';
    }
}

double max_input_norm(const PiecewiseTrajectory &traj)
{
    double worst = 0.0;
    for (const auto &iv : traj.intervals)
        worst = std::max(worst, iv.u.norm());
    return worst;
}

double max_waypoint_speed(const PiecewiseTrajectory &traj)
{
    double worst = 0.0;
    for (double t : traj.waypoint_times)
        worst = std::max(worst, sample(traj, t).v.norm());
    return worst;
}

} // namespace

RunResult run_survey(const SurveySpec &spec)
{
    RunResult result;
    try
    {
        const ResolvedInstance inst = resolve(spec);
        const std::filesystem::path dir(spec.out_dir);
        std::filesystem::create_directories(dir);

        if (spec.waypoints_only)
        {
            write_text(dir / "waypoints.json",
                       waypoints_document(inst, nullptr).dump(2) + "\n",
                       result.artifacts);
            result.message = "waypoints written; solves skipped";
            return result;
        }

        const NodeSolution sol = plan_min_time(inst.plan, inst.params);
        const PiecewiseTrajectory traj = interpolate(sol, inst.plan, inst.params);
        result.solved = true;
        result.total_time = sol.total_time;

        std::optional<PiecewiseTrajectory> base;
        if (spec.baseline)
            base = baseline_trajectory(plan_baseline(inst.plan, inst.params), inst.plan);

        AuditOptions audit_options;
        audit_options.profile = spec.profile;
        result.report =
            audit(traj, inst.plan, inst.params, base ? &*base : nullptr, audit_options);

        json report_doc = report_document(result.report, spec.profile);

        write_text(dir / "waypoints.json",
                   waypoints_document(inst, &traj.waypoint_times).dump(2) + "\n",
                   result.artifacts);

        std::ostringstream csv;
        write_csv(csv, traj, spec.sample_rate_hz);
        write_text(dir / "trajectory.csv", csv.str(), result.artifacts);

        std::ostringstream segments;
        write_segment_table(segments, traj);
        write_text(dir / "segments.json", segments.str(), result.artifacts);

        std::ostringstream plot;
        plot << "method,t,x,y,z,v_norm,u_norm\n";
        append_plot_rows(plot, "optimized", traj, spec.sample_rate_hz);

        if (spec.smooth)
        {
            const QuarticSpline spline = smooth(traj, sol, inst.params.eps_time);
            std::ostringstream smooth_csv;
            write_csv(smooth_csv, spline, spec.sample_rate_hz);
            write_text(dir / "smoothed.csv", smooth_csv.str(), result.artifacts);
            append_plot_rows(plot, "smoothed", spline, spec.sample_rate_hz);

            AuditOptions smoothed_options = audit_options;
            smoothed_options.input_allowance = 1.5;
            const AuditReport smoothed_report = audit_smoothed(
                spline, traj.waypoint_times, inst.plan, inst.params, smoothed_options);
            report_doc["smoothed"] = {
                {"passed", smoothed_report.passed},
                {"max_waypoint_error_m", smoothed_report.max_waypoint_error},
                {"max_blur_excess_mps", smoothed_report.max_blur_excess},
                {"max_input_excess_mps2", smoothed_report.max_input_excess},
                {"max_deviation_m", max_position_deviation(traj, spline)}};
        }
        if (base)
        {
            std::ostringstream base_csv;
            write_csv(base_csv, *base, spec.sample_rate_hz);
            write_text(dir / "baseline.csv", base_csv.str(), result.artifacts);
            append_plot_rows(plot, "baseline", *base, spec.sample_rate_hz);
        }
        write_text(dir / "plot.csv", plot.str(), result.artifacts);
        write_text(dir / "audit.json", report_doc.dump(2) + "\n", result.artifacts);

        if (!result.report.passed)
        {
            result.status = RunStatus::infeasible;
            std::ostringstream msg;
            msg << "audit failed:";
            for (const std::string &f : result.report.failures)
                msg << " [" << f << "]";
            result.message = msg.str();
        }
        else
        {
            result.message = "audit passed";
        }
    }
    catch (const InvalidParameterError &err)
    {
        result.status = RunStatus::spec_error;
        result.message = err.what();
    }
    catch (const InfeasibleError &err)
    {
        result.status = RunStatus::infeasible;
        result.message = err.what();
    }
    catch (const std::exception &err)
    {
        result.status = RunStatus::internal_error;
        result.message = err.what();
    }
    return result;
}

std::string CompareResult::table() const
{
    std::ostringstream out;
    out << std::left << std::setw(12) << "method" << std::right << std::setw(14)
        << "total_time_s" << std::setw(22) << "max_waypoint_speed" << std::setw(14)
        << "max_input" << '\n';
    for (const CompareRow &row : rows)
    {
        out << std::left << std::setw(12) << row.method;
        if (row.solved)
            out << std::right << std::setw(14) << format_number(row.total_time)
                << std::setw(22) << format_number(row.max_waypoint_speed)
                << std::setw(14) << format_number(row.max_input_norm);
        else
            out << std::right << std::setw(14) << "failed" << std::setw(22) << "-"
                << std::setw(14) << "-";
        out << '\n';
    }
    return out.str();
}

CompareResult compare_survey(const SurveySpec &spec)
{
    CompareResult result;
    ResolvedInstance inst;
    try
    {
        inst = resolve(spec);
    }
    catch (const InvalidParameterError &err)
    {
        result.status = RunStatus::spec_error;
        result.message = err.what();
        return result;
    }

    CompareRow optimized{"optimized", 0.0, 0.0, 0.0, false};
    CompareRow bang{"baseline", 0.0, 0.0, 0.0, false};
    std::string failure;

    try
    {
        const NodeSolution sol = plan_min_time(inst.plan, inst.params);
        const PiecewiseTrajectory traj = interpolate(sol, inst.plan, inst.params);
        optimized.solved = true;
        optimized.total_time = sol.total_time;
        optimized.max_waypoint_speed = max_waypoint_speed(traj);
        optimized.max_input_norm = max_input_norm(traj);
    }
    catch (const std::exception &err)
    {
        failure = std::string("optimized planner failed: ") + err.what();
    }

    try
    {
        const PiecewiseTrajectory base =
            baseline_trajectory(plan_baseline(inst.plan, inst.params), inst.plan);
        bang.solved = true;
        bang.total_time = base.duration();
        bang.max_waypoint_speed = max_waypoint_speed(base);
        bang.max_input_norm = max_input_norm(base);
    }
    catch (const std::exception &err)
    {
        if (!failure.empty())
            failure += "; ";
        failure += std::string("baseline planner failed: ") + err.what();
    }

    result.rows = {optimized, bang};
    if (optimized.solved && bang.solved && bang.total_time > 0.0)
        result.relative_delta =
            (optimized.total_time - bang.total_time) / bang.total_time;

    if (!failure.empty())
    {
        result.status = RunStatus::infeasible;
        result.message = failure;
    }

    try
    {
        const std::filesystem::path dir(spec.out_dir);
        std::filesystem::create_directories(dir);
        json doc = json::array();
        for (const CompareRow &row : result.rows)
            doc.push_back({{"method", row.method},
                           {"solved", row.solved},
                           {"total_time_s", row.total_time},
                           {"max_waypoint_speed_mps", row.max_waypoint_speed},
                           {"max_input_mps2", row.max_input_norm}});
        json wrapper = {{"rows", doc}, {"relative_delta", result.relative_delta}};
        std::ofstream out(dir / "compare.json", std::ios::binary);
        out << wrapper.dump(2) << "\n";
    }
    catch (const std::exception &err)
    {
        if (result.status == RunStatus::ok)
        {
            result.status = RunStatus::internal_error;
            result.message = err.what();
        }
    }
    return result;
}

} // namespace aerosurvey
