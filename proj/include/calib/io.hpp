#pragma once

#include <string>

#include "calib/calibrators.hpp"
#include "calib/ece.hpp"
#include "calib/simplex.hpp"

namespace calib::io {

// "%.17g" -- enough decimal digits to reproduce any double bit-exactly.
std::string format_full(double v);
// "%.12g" -- reporting precision for estimate CSV output.
std::string format_est(double v);

// ---------------------------------------------------------------------------
// Prediction files
// ---------------------------------------------------------------------------
// CSV with a mandatory header. Two accepted layouts:
//   z_0,...,z_{L-1},label      label = 0-based class index
//   z_0,...,z_{L-1},y_0,...,y_{L-1}   one-hot label row
// Labels are stored internally as indices either way. Every row is validated
// as a probability vector; failures raise IngestError with the 1-based file
// line number.

LabeledDataset parse_prediction_csv(const std::string& text);
LabeledDataset read_prediction_csv(const std::string& path);

std::string prediction_csv(const LabeledDataset& data);
void write_prediction_csv(const std::string& path, const LabeledDataset& data);

// ---------------------------------------------------------------------------
// Fitted-map JSON
// ---------------------------------------------------------------------------
// Schema by kind ("kind" is always present):
//   ts:       {kind, t}
//   ets:      {kind, t, w}
//   irm:      {kind, breakpoints, levels, eps}
//   irova:    {kind, per_class: [{breakpoints, levels, eps}, ...]}
//   irova-ts: {kind, t, per_class: [...]}
// Doubles round-trip bit-exactly.

std::string map_json(const CalibrationMap& map);
CalibrationMap map_from_json_text(const std::string& text);
void save_map(const std::string& path, const CalibrationMap& map);
CalibrationMap load_map(const std::string& path);

// ---------------------------------------------------------------------------
// Estimate rows
// ---------------------------------------------------------------------------

// "estimator,d,n_e,detail,value,stderr" (stderr empty when not applicable).
std::string ece_csv_header();
std::string ece_csv_row(const EceEstimate& est);

// Whole-file helpers.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace calib::io
