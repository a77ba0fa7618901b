#include "aerosurvey/camera_survey.hpp"

#include <algorithm>
#include <cmath>

namespace aerosurvey
{

namespace
{

// Grid coordinates 0, s, 2s, ... along one axis, with the final position
// clamped to the axis extent so the last gap shrinks instead of overshooting.
std::vector<double> clamped_positions(double extent, double spacing)
{
    if (spacing <= 0.0)
        throw InvalidParameterError("grid spacing must be positive");
    std::vector<double> pos;
    const int steps = static_cast<int>(std::ceil(extent / spacing - 1e-9));
    for (int i = 0; i < std::max(steps, 1); ++i)
        pos.push_back(i * spacing);
    pos.push_back(extent);
    return pos;
}

SurveyPlan serpentine(double roi_w, double roi_h, double altitude,
                      double line_spacing, double capture_spacing,
                      bool single_line)
{
    if (roi_w <= 0.0 || roi_h <= 0.0)
        throw InvalidParameterError("ROI dimensions must be positive");

    // Lines run parallel to the longer side to minimize turn count.
    const bool lines_along_x = roi_w >= roi_h;
    const double along_extent = lines_along_x ? roi_w : roi_h;
    const double cross_extent = lines_along_x ? roi_h : roi_w;

    const std::vector<double> along = clamped_positions(along_extent, capture_spacing);
    std::vector<double> cross;
    if (single_line)
        cross.push_back(cross_extent / 2.0);
    else
        cross = clamped_positions(cross_extent, line_spacing);

    SurveyPlan plan;
    plan.altitude_m = altitude;
    plan.line_spacing_m = line_spacing;
    plan.capture_spacing_m = capture_spacing;
    for (std::size_t li = 0; li < cross.size(); ++li)
    {
        for (std::size_t pi = 0; pi < along.size(); ++pi)
        {
            const double a = (li % 2 == 0) ? along[pi] : along[along.size() - 1 - pi];
            const double x = lines_along_x ? a : cross[li];
            const double y = lines_along_x ? cross[li] : a;
            plan.waypoints.emplace_back(x, y, altitude);
        }
    }
    plan.validate();
    return plan;
}

} // namespace

void CameraSpec::validate_blur_fields() const
{
    if (allowable_blur_px <= 0.0)
        throw InvalidParameterError("allowable_blur_px must be positive");
    if (ground_resolution_px_per_m <= 0.0)
        throw InvalidParameterError("ground_resolution_px_per_m must be positive");
    if (shutter_s <= 0.0)
        throw InvalidParameterError("shutter_s must be positive");
}

void CameraSpec::validate_fov_fields() const
{
    if (!(fov_h_rad > 0.0) || fov_h_rad >= M_PI)
        throw InvalidParameterError("fov_h_rad must lie in (0, pi)");
    if (!(fov_v_rad > 0.0) || fov_v_rad >= M_PI)
        throw InvalidParameterError("fov_v_rad must lie in (0, pi)");
}

void SurveyPlan::validate() const
{
    if (waypoints.size() < 2)
        throw InvalidParameterError("survey plan needs at least two waypoints");
    if (!allow_coincident)
    {
        for (std::size_t i = 1; i < waypoints.size(); ++i)
            if ((waypoints[i] - waypoints[i - 1]).norm() == 0.0)
                throw InvalidParameterError(
                    "consecutive waypoints coincide (set allow_coincident to permit)");
    }
}

double compute_v_blur(const CameraSpec &camera)
{
    camera.validate_blur_fields();
    return camera.allowable_blur_px /
           (camera.ground_resolution_px_per_m * camera.shutter_s);
}

double compute_flight_height(double gsd_m_per_px, const CameraSpec &camera)
{
    if (gsd_m_per_px <= 0.0)
        throw InvalidParameterError("gsd must be positive");
    if (camera.focal_length_m <= 0.0 || camera.sensor_width_m <= 0.0 ||
        camera.image_width_px <= 0.0)
        throw InvalidParameterError(
            "focal length, sensor width and image width must be positive");
    return gsd_m_per_px * camera.focal_length_m * camera.image_width_px /
           camera.sensor_width_m;
}

Footprint compute_footprint(double altitude_m, const CameraSpec &camera)
{
    if (altitude_m <= 0.0)
        throw InvalidParameterError("altitude must be positive");
    camera.validate_fov_fields();
    Footprint fp;
    fp.width_m = 2.0 * altitude_m * std::tan(camera.fov_h_rad / 2.0);
    fp.height_m = 2.0 * altitude_m * std::tan(camera.fov_v_rad / 2.0);
    return fp;
}

SurveyPlan generate_lawnmower_grid(double roi_width_m, double roi_height_m,
                                   double altitude_m, double line_spacing_m,
                                   double capture_spacing_m)
{
    return serpentine(roi_width_m, roi_height_m, altitude_m, line_spacing_m,
                      capture_spacing_m, /*single_line=*/false);
}

SurveyPlan generate_lawnmower(double roi_width_m, double roi_height_m,
                              double altitude_m, double overlap_fraction,
                              const CameraSpec &camera)
{
    if (overlap_fraction < 0.0 || overlap_fraction >= 1.0)
        throw InvalidParameterError("overlap_fraction must lie in [0, 1)");
    const Footprint fp = compute_footprint(altitude_m, camera);

    // Capture spacing follows the horizontal-FoV extent, line spacing the
    // vertical-FoV extent, matching the camera mounting convention where the
    // sensor's horizontal axis is aligned with the flight direction.
    const double capture_spacing = fp.width_m * (1.0 - overlap_fraction);
    const double line_spacing = fp.height_m * (1.0 - overlap_fraction);

    const bool lines_along_x = roi_width_m >= roi_height_m;
    const double cross_extent = lines_along_x ? roi_height_m : roi_width_m;
    const bool single_line = cross_extent <= fp.height_m;

    return serpentine(roi_width_m, roi_height_m, altitude_m, line_spacing,
                      capture_spacing, single_line);
}

} // namespace aerosurvey
