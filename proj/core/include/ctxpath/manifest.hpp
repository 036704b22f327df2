#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ctxpath/features.hpp"
#include "ctxpath/labels.hpp"
#include "ctxpath/pipeline.hpp"

namespace ctxpath {

struct ManifestRecord {
    std::string image_id;
    std::filesystem::path path;  // resolved against the manifest directory
    ClassLabel label = ClassLabel::Normal;
};

// CSV with header `image_id,path,label`; labels lowercase class names.
class DatasetManifest {
public:
    DatasetManifest() = default;
    explicit DatasetManifest(std::vector<ManifestRecord> records);

    const std::vector<ManifestRecord>& records() const noexcept { return records_; }
    const ManifestRecord& at(const std::string& image_id) const;

    Dataset dataset() const;
    ImageLoader loader() const;

private:
    std::vector<ManifestRecord> records_;
};

/// Throws ManifestSchema on header, field-count, label or duplicate-id errors.
DatasetManifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir);

/// Also throws IoFailure when `check_files` is set and a path does not exist.
DatasetManifest read_manifest(const std::filesystem::path& path, bool check_files = true);

std::string format_manifest(const std::vector<ManifestRecord>& records, const std::filesystem::path& base_dir);
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestRecord>& records);

}  // namespace ctxpath
