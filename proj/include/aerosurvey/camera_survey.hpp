#ifndef AEROSURVEY_CAMERA_SURVEY_HPP
#define AEROSURVEY_CAMERA_SURVEY_HPP

#include "aerosurvey/common.hpp"

#include <cstddef>
#include <vector>

namespace aerosurvey
{

/// Optics and shutter parameters that determine the blur-speed bound and
/// the ground footprint of one capture.
struct CameraSpec
{
    double allowable_blur_px = 1.0;         // rho, pixels
    double ground_resolution_px_per_m = 1.0; // G_x, pixels per meter
    double shutter_s = 1.0;                 // T_s, seconds
    double fov_h_rad = 0.0;                 // horizontal field of view
    double fov_v_rad = 0.0;                 // vertical field of view
    double focal_length_m = 0.0;
    double sensor_width_m = 0.0;
    double image_width_px = 0.0;

    /// Throws InvalidParameterError if the blur fields are unusable.
    void validate_blur_fields() const;
    /// Throws InvalidParameterError if the footprint fields are unusable.
    void validate_fov_fields() const;
};

/// Ordered waypoint list for one planar survey.
struct SurveyPlan
{
    std::vector<Vec3> waypoints; // meters, visit order
    double altitude_m = 0.0;
    double line_spacing_m = 0.0;
    double capture_spacing_m = 0.0;
    bool allow_coincident = false; // degenerate consecutive duplicates permitted

    std::size_t size() const { return waypoints.size(); }
    void validate() const;
};

/// Maximum speed at a capture point that keeps pixel smear below the
/// allowable blur during the shutter interval: rho / (G_x * T_s).
double compute_v_blur(const CameraSpec &camera);

/// Flight height for a desired ground sample distance using the pinhole
/// relation H = gsd * f * image_width_px / sensor_width.
double compute_flight_height(double gsd_m_per_px, const CameraSpec &camera);

struct Footprint
{
    double width_m = 0.0;  // along the horizontal-FoV axis
    double height_m = 0.0; // along the vertical-FoV axis
};

/// Ground rectangle imaged from the given altitude.
Footprint compute_footprint(double altitude_m, const CameraSpec &camera);

/// Serpentine grid with explicit spacings. Grid lines run parallel to the
/// longer ROI side; the final line/point on each axis is clamped to the ROI
/// edge so waypoints stay inside the rectangle.
SurveyPlan generate_lawnmower_grid(double roi_width_m, double roi_height_m,
                                   double altitude_m, double line_spacing_m,
                                   double capture_spacing_m);

/// Serpentine grid derived from the camera footprint at the given altitude
/// and the requested image overlap. When the ROI cross extent fits inside a
/// single footprint the grid degenerates to one centered line.
SurveyPlan generate_lawnmower(double roi_width_m, double roi_height_m,
                              double altitude_m, double overlap_fraction,
                              const CameraSpec &camera);

} // namespace aerosurvey

#endif
