#pragma once

#include <map>
#include <string>
#include <vector>

namespace fhinf {

std::string sha256_bytes(const std::string& data);
std::string sha256_file(const std::string& path);

// Whole-file atomic write: temp file in the same directory, then rename.
void write_text_atomic(const std::string& path, const std::string& content);

// Reproducibility record emitted next to every command's outputs.
struct RunManifest {
    std::string command;
    std::string version;
    std::map<std::string, std::string> parameters;
    std::map<std::string, std::string> input_digests;   // path -> sha256 of bytes read
    std::vector<std::string> outputs;                   // emission order
    std::map<std::string, std::string> output_digests;  // path -> sha256 of bytes written
    double wall_time = 0.0;

    void add_input(const std::string& path);
    void add_output(const std::string& path);
    std::string to_json() const;
};

void write_manifest(const RunManifest& manifest, const std::string& path);

}  // namespace fhinf
