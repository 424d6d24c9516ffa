#include <algorithm>
#include <cctype>

#include "lesion/cli.hpp"
#include "lesion/codec.hpp"
#include "lesion/error.hpp"
#include "lesion/random.hpp"

namespace lesion::cli {

std::size_t DatasetManifest::count(int label) const {
  return static_cast<std::size_t>(std::count_if(
      entries.begin(), entries.end(), [&](const ManifestEntry& e) { return e.label == label; }));
}

std::vector<eval::Sample> DatasetManifest::samples() const {
  std::vector<eval::Sample> out;
  out.reserve(entries.size());
  for (const ManifestEntry& e : entries) out.push_back({e.id, e.label, e.path});
  return out;
}

namespace {

bool is_jpeg_name(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".jpg" || ext == ".jpeg";
}

std::uint64_t mix(std::uint64_t h, std::string_view bytes) { return fnv1a64(bytes, h); }

}  // namespace

DatasetManifest ingest(const fs::path& root) {
  if (!fs::is_directory(root)) fail(ErrorKind::IoError, "dataset root " + root.string() + " is not a directory");
  DatasetManifest m;
  m.root = root;
  m.fingerprint = fnv1a64("");

  struct ClassDir {
    std::vector<std::string> names;
    int label;
  };
  const ClassDir classes[] = {{{"melanoma"}, eval::kMelanoma}, {{"naevus", "nevus"}, eval::kNevus}};

  for (const ClassDir& cls : classes) {
    fs::path dir;
    for (const auto& name : cls.names)
      if (fs::is_directory(root / name)) {
        dir = root / name;
        break;
      }
    if (dir.empty())
      fail(ErrorKind::EmptyDataset, "missing class directory " + cls.names.front() + "/ under " + root.string());

    std::vector<fs::path> files;
    for (const auto& de : fs::directory_iterator(dir))
      if (de.is_regular_file() && is_jpeg_name(de.path())) files.push_back(de.path());
    std::sort(files.begin(), files.end());

    std::size_t readable = 0;
    for (const fs::path& f : files) {
      const std::string id = dir.filename().string() + "/" + f.filename().string();
      try {
        const auto bytes = img::read_file(f);
        img::decode_image(bytes);
        m.fingerprint = mix(m.fingerprint, id);
        m.fingerprint = mix(m.fingerprint, std::string_view(reinterpret_cast<const char*>(bytes.data()),
                                                            bytes.size()));
        m.entries.push_back({id, f, cls.label});
        ++readable;
      } catch (const Error& e) {
        m.skipped.push_back(id + ": " + e.what());
      }
    }
    if (readable == 0)
      fail(ErrorKind::EmptyDataset, "no readable JPEG images in " + dir.string());
  }
  std::sort(m.entries.begin(), m.entries.end(),
            [](const ManifestEntry& a, const ManifestEntry& b) { return a.id < b.id; });
  return m;
}

}  // namespace lesion::cli
