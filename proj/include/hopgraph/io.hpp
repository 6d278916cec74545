#pragma once

#include "hopgraph/features.hpp"
#include "hopgraph/graph.hpp"
#include "hopgraph/training.hpp"

#include <filesystem>
#include <string>

namespace hopgraph {

/// Formats a double so that reading it back yields the same bits.
std::string format_double(double v);

/// `day,user_id,item_id` with a header row, 0-based ids.
void write_events_csv(const std::filesystem::path& path, const EventLog& log);
EventLog read_events_csv(const std::filesystem::path& path, int n_users, int n_items);

/// `node_kind,node_id,attr_name,value`; value is a space-separated vector
/// (one-hot for categoricals). An empty value marks a missing attribute and
/// reads back as a zero vector.
void write_attributes_csv(const std::filesystem::path& path, const AttributeTable& table);
AttributeTable read_attributes_csv(const std::filesystem::path& path, int n_users, int n_items);

/// Dataset directory layout: events.csv, attributes.csv, dataset.json
/// (sizes and split) and, for generated data, synth_config.json.
void save_dataset(const std::filesystem::path& dir, const Dataset& ds,
                  const std::string& synth_config_json = {});
Dataset load_dataset(const std::filesystem::path& dir);

/// Writes to a temporary sibling and renames over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace hopgraph
