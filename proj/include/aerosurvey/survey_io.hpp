#ifndef AEROSURVEY_SURVEY_IO_HPP
#define AEROSURVEY_SURVEY_IO_HPP

#include "aerosurvey/camera_survey.hpp"
#include "aerosurvey/planner_params.hpp"
#include "aerosurvey/validation_oracle.hpp"

#include <optional>
#include <string>
#include <vector>

namespace aerosurvey
{

/// Full pipeline request parsed from a survey-spec document. Schema (JSON):
///
///   roi:      { width_m, height_m }                         meters
///   altitude_m                                  XOR         meters
///   gsd_m_per_px (with camera optics fields)                meters/pixel
///   overlap_fraction                                        [0, 1)
///   camera:   { fov_h_deg, fov_v_deg,                       degrees
///               allowable_blur_px, ground_resolution_px_per_m, shutter_s,
///               focal_length_m, sensor_width_m, image_width_px }
///   planner:  { u_max_mps2, v_axis_max_mps, v_blur_mps, switching_points,
///               u_z_min_mps2, eps_feas, eps_opt, eps_time }
///   output:   { sample_rate_hz, directory }
///   mode:     { smooth, baseline, waypoints_only,
///               tolerance_profile: "default" | "strict" }
///
/// The capture-speed bound resolves to planner.v_blur_mps when given, else to
/// the camera blur model when its fields are present, else unbounded.
struct SurveySpec
{
    double roi_width_m = 0.0;
    double roi_height_m = 0.0;
    std::optional<double> altitude_m;
    std::optional<double> gsd_m_per_px;
    double overlap_fraction = 0.5;

    CameraSpec camera;
    bool camera_blur_fields_given = false;
    bool camera_fov_given = false;

    PlannerParams planner;
    bool v_blur_given = false;

    double sample_rate_hz = 100.0;
    std::string out_dir = "survey_out";

    bool smooth = true;
    bool baseline = true;
    bool waypoints_only = false;
    ToleranceProfile profile = ToleranceProfile::standard;

    /// Throws InvalidParameterError with a field-level diagnostic.
    void validate() const;

    static SurveySpec from_json_text(const std::string &text);
    static SurveySpec load(const std::string &path);
};

/// Exit-code partition of pipeline outcomes.
enum class RunStatus : int
{
    ok = 0,
    spec_error = 2,
    infeasible = 3,
    internal_error = 4
};

struct RunResult
{
    RunStatus status = RunStatus::ok;
    std::string message;
    std::vector<std::string> artifacts; // file names written under out_dir
    bool solved = false;
    AuditReport report;      // populated once the audit ran
    double total_time = 0.0; // optimized trajectory duration
};

/// plan pipeline: geometry, warm start, minimum-time solve, interpolation,
/// optional smoothing and baseline, audit, artifact writing. Never throws;
/// failures are reported through the status/message.
RunResult run_survey(const SurveySpec &spec);

struct CompareRow
{
    std::string method;
    double total_time = 0.0;
    double max_waypoint_speed = 0.0;
    double max_input_norm = 0.0;
    bool solved = false;
};

struct CompareResult
{
    RunStatus status = RunStatus::ok;
    std::string message;
    std::vector<CompareRow> rows;
    double relative_delta = 0.0; // (optimized - baseline) / baseline

    std::string table() const;
};

/// compare pipeline: both planners on identical waypoints and limits; a
/// partial report is produced when one side fails.
CompareResult compare_survey(const SurveySpec &spec);

} // namespace aerosurvey

#endif
