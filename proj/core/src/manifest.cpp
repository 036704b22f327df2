#include "ctxpath/manifest.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "ctxpath/image_io.hpp"
#include "text_util.hpp"

namespace ctxpath {

DatasetManifest::DatasetManifest(std::vector<ManifestRecord> records) : records_(std::move(records)) {
    std::set<std::string> ids;
    for (const auto& r : records_)
        if (!ids.insert(r.image_id).second)
            throw Error(ErrorCode::ManifestSchema, "duplicate image_id '" + r.image_id + "'");
}

const ManifestRecord& DatasetManifest::at(const std::string& image_id) const {
    for (const auto& r : records_)
        if (r.image_id == image_id) return r;
    throw Error(ErrorCode::MissingRecord, "manifest has no image '" + image_id + "'");
}

Dataset DatasetManifest::dataset() const {
    Dataset out;
    out.reserve(records_.size());
    for (const auto& r : records_) out.push_back({r.image_id, r.label});
    return out;
}

ImageLoader DatasetManifest::loader() const {
    std::map<std::string, std::filesystem::path> paths;
    for (const auto& r : records_) paths.emplace(r.image_id, r.path);
    return [paths = std::move(paths)](const std::string& id) {
        const auto it = paths.find(id);
        if (it == paths.end()) throw Error(ErrorCode::MissingRecord, "no image path for '" + id + "'");
        return read_image(it->second);
    };
}

DatasetManifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir) {
    const auto lines = detail::split(text, '\n');
    std::size_t line_no = 0;
    bool header_seen = false;
    std::vector<ManifestRecord> records;
    for (const auto& raw : lines) {
        ++line_no;
        const std::string_view line = detail::trim(raw);
        if (line.empty()) continue;
        const auto fields = detail::split(line, ',');
        auto where = [&] { return "manifest line " + std::to_string(line_no) + ": "; };
        if (!header_seen) {
            if (fields.size() != 3 || detail::trim(fields[0]) != "image_id" || detail::trim(fields[1]) != "path" ||
                detail::trim(fields[2]) != "label")
                throw Error(ErrorCode::ManifestSchema, where() + "header must be 'image_id,path,label'");
            header_seen = true;
            continue;
        }
        if (fields.size() != 3)
            throw Error(ErrorCode::ManifestSchema, where() + "expected 3 fields, got " + std::to_string(fields.size()));
        ManifestRecord r;
        r.image_id = std::string(detail::trim(fields[0]));
        const std::string path(detail::trim(fields[1]));
        if (r.image_id.empty() || path.empty())
            throw Error(ErrorCode::ManifestSchema, where() + "empty image_id or path");
        try {
            r.label = parse_class_label(detail::trim(fields[2]));
        } catch (const Error& e) {
            throw Error(ErrorCode::ManifestSchema, where() + e.what());
        }
        const std::filesystem::path p(path);
        r.path = p.is_absolute() ? p : base_dir / p;
        records.push_back(std::move(r));
    }
    if (!header_seen) throw Error(ErrorCode::ManifestSchema, "manifest is empty (missing header)");
    return DatasetManifest(std::move(records));
}

DatasetManifest read_manifest(const std::filesystem::path& path, bool check_files) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open manifest " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    DatasetManifest manifest = parse_manifest(ss.str(), path.parent_path());
    if (check_files)
        for (const auto& r : manifest.records())
            if (!std::filesystem::exists(r.path))
                throw Error(ErrorCode::IoFailure, "image for '" + r.image_id + "' not found: " + r.path.string());
    return manifest;
}

std::string format_manifest(const std::vector<ManifestRecord>& records, const std::filesystem::path& base_dir) {
    std::ostringstream os;
    os << "image_id,path,label\n";
    for (const auto& r : records) {
        const auto rel = base_dir.empty() ? r.path : r.path.lexically_relative(base_dir);
        os << r.image_id << ',' << (rel.empty() ? r.path : rel).generic_string() << ',' << to_string(r.label) << '\n';
    }
    return os.str();
}

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestRecord>& records) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write manifest " + path.string());
    out << format_manifest(records, path.parent_path());
    if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

}  // namespace ctxpath
