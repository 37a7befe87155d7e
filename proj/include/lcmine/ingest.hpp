#pragma once

#include <map>
#include <string>

#include "lcmine/types.hpp"

namespace lcmine {

/// Logical-to-physical column name remapping. Keys are the logical names
/// documented below; values are the header names in the files. Defaults
/// follow the public drone-recording naming (frame, id, x, y, width,
/// height, laneId, precedingId, ...), with the dataset's "height" column
/// carrying the lateral extent.
using ColumnMap = std::map<std::string, std::string>;

ColumnMap default_column_map();

struct LoadOptions {
  ColumnMap column_map = default_column_map();
};

struct LoadResult {
  Recording recording;
  ValidationReport validation;
};

/// Loads one recording from its three CSV files (tracks, tracks-meta,
/// recording-meta), converts frame indices to seconds, builds the lane
/// layout from the recording-meta markings, and validates the result.
LoadResult load_recording(const std::string& tracks_path,
                          const std::string& tracks_meta_path,
                          const std::string& recording_meta_path,
                          const LoadOptions& options = {});

/// Writes a recording back to the three-file CSV schema (default column
/// names, 6-decimal numeric precision). Paths are created/overwritten.
void write_recording(const Recording& recording, const std::string& tracks_path,
                     const std::string& tracks_meta_path,
                     const std::string& recording_meta_path);

/// Convenience: write into dir as tracks.csv / tracksMeta.csv /
/// recordingMeta.csv, creating the directory when needed.
void write_recording_dir(const Recording& recording, const std::string& dir);

struct RecordingPaths {
  std::string tracks;
  std::string tracks_meta;
  std::string recording_meta;
};

/// Locates the three files inside a directory (accepts optional numeric
/// prefixes like 01_tracks.csv).
RecordingPaths locate_recording(const std::string& dir);

}  // namespace lcmine
