#include "triage/ingest/synthetic.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "triage/core/rng.hpp"
#include "triage/error.hpp"
#include "triage/ingest/csv.hpp"

namespace triage::synth {
namespace {

bool is_mover(Archetype a) { return a == Archetype::Walker || a == Archetype::Runner; }

// Triangle wave folding of an unbounded coordinate into [0, limit].
double reflect(double v, double limit) {
  if (limit <= 0.0) return 0.0;
  const double period = 2.0 * limit;
  double m = std::fmod(v, period);
  if (m < 0) m += period;
  return m <= limit ? m : period - m;
}

int round_half_up(double v) { return static_cast<int>(std::floor(v + 0.5)); }

// cos/sin that are exact on the axis directions.
std::pair<double, double> direction(double heading_deg) {
  double h = std::fmod(heading_deg, 360.0);
  if (h < 0) h += 360.0;
  if (h == 0.0) return {1.0, 0.0};
  if (h == 90.0) return {0.0, 1.0};
  if (h == 180.0) return {-1.0, 0.0};
  if (h == 270.0) return {0.0, -1.0};
  const double rad = h * std::numbers::pi / 180.0;
  return {std::cos(rad), std::sin(rad)};
}

std::pair<int, int> body_size(const Actor& a) {
  if (a.archetype == Archetype::Prone) return {a.body_h, a.body_w};
  return {a.body_w, a.body_h};
}

std::int64_t last_frame_exclusive(const Actor& a, std::int64_t frame_count) {
  return a.until_frame < 0 ? frame_count : std::min(a.until_frame, frame_count);
}

bool box_at(const Actor& a, const Script& s, std::int64_t frame, BBox& out) {
  if (frame < a.spawn_frame || frame >= last_frame_exclusive(a, s.frame_count)) return false;
  const auto [w, h] = body_size(a);
  out.w = w;
  out.h = h;
  if (!is_mover(a.archetype)) {
    out.x = a.x;
    out.y = a.y;
    return true;
  }
  const double dt = static_cast<double>(frame - a.spawn_frame);
  const auto [dx, dy] = direction(a.heading_deg);
  out.x = round_half_up(reflect(a.x + dx * a.speed * dt, s.width - w));
  out.y = round_half_up(reflect(a.y + dy * a.speed * dt, s.height - h));
  return true;
}

bool overlaps(const BBox& a, const BBox& b) {
  return a.x < b.x + b.w && b.x < a.x + a.w && a.y < b.y + b.h && b.y < a.y + a.h;
}

}  // namespace

DamageStatus ground_truth(Archetype a) {
  switch (a) {
    case Archetype::Stander:
    case Archetype::Onlooker: return DamageStatus::Safe;
    case Archetype::Walker:
    case Archetype::Runner: return DamageStatus::Evacuation;
    case Archetype::Waver: return DamageStatus::CallForHelp;
    case Archetype::Prone: return DamageStatus::Emergency;
  }
  return DamageStatus::Safe;
}

std::string to_string(Archetype a) {
  switch (a) {
    case Archetype::Stander: return "stander";
    case Archetype::Onlooker: return "onlooker";
    case Archetype::Walker: return "walker";
    case Archetype::Runner: return "runner";
    case Archetype::Waver: return "waver";
    case Archetype::Prone: return "prone";
  }
  return "stander";
}

Archetype archetype_from_string(const std::string& s) {
  for (auto a : kAllArchetypes) {
    if (to_string(a) == s) return a;
  }
  throw InvalidScript("unknown archetype '" + s + "'");
}

void validate(const Script& s) {
  if (s.width < 1 || s.height < 1 || s.frame_count < 1 || !(s.fps > 0)) {
    throw InvalidScript("scene size, fps and frame count must be positive");
  }
  std::vector<BBox> spawn_boxes;
  for (std::size_t i = 0; i < s.actors.size(); ++i) {
    const Actor& a = s.actors[i];
    const std::string who = "actor " + std::to_string(i) + " (" + to_string(a.archetype) + "): ";
    if (a.speed < 0) throw InvalidScript(who + "speed < 0");
    if (a.archetype == Archetype::Runner && a.speed < kMinRunnerSpeed) {
      throw InvalidScript(who + "runners move at least 3 px/frame");
    }
    if (a.archetype == Archetype::Walker && a.speed <= 0) {
      throw InvalidScript(who + "walkers need a positive speed");
    }
    if (a.body_w < 1 || a.body_h < 1) throw InvalidScript(who + "body size must be positive");
    if (a.spawn_frame < 0 || a.spawn_frame >= s.frame_count) {
      throw InvalidScript(who + "spawn frame outside the scene");
    }
    const auto [w, h] = body_size(a);
    if (a.archetype == Archetype::Prone && w < 1.5 * h) {
      throw InvalidScript(who + "prone body must satisfy w/h >= 1.5");
    }
    if (a.archetype == Archetype::Waver && (h < 2 || w < 1)) {
      throw InvalidScript(who + "waver body too small for the waving sub-sprite");
    }
    if (!bbox_fits({a.x, a.y, w, h}, s.width, s.height)) {
      throw InvalidScript(who + "spawn box outside the frame");
    }
  }
  for (std::size_t i = 0; i < s.actors.size(); ++i) {
    for (std::size_t j = i + 1; j < s.actors.size(); ++j) {
      const std::int64_t f = std::max(s.actors[i].spawn_frame, s.actors[j].spawn_frame);
      BBox a, b;
      if (box_at(s.actors[i], s, f, a) && box_at(s.actors[j], s, f, b) && overlaps(a, b)) {
        throw InvalidScript("overlapping spawn: actors " + std::to_string(i) + " and " +
                            std::to_string(j));
      }
    }
  }
}

void add_random_actors(Script& script, int count) {
  rng::Engine e(rng::combine(script.seed, 0x5CE9E));
  constexpr int kCell = 40;
  const int cols = script.width / kCell;
  const int rows = script.height / kCell;
  std::vector<int> cells(static_cast<std::size_t>(std::max(0, cols * rows)));
  for (std::size_t i = 0; i < cells.size(); ++i) cells[i] = static_cast<int>(i);
  // Skip cells already holding a spawn box.
  std::erase_if(cells, [&](int c) {
    const BBox cell{(c % cols) * kCell, (c / cols) * kCell, kCell, kCell};
    for (const auto& a : script.actors) {
      const auto [w, h] = body_size(a);
      if (overlaps(cell, {a.x, a.y, w, h})) return true;
    }
    return false;
  });
  rng::shuffle(std::span<int>(cells), e);
  if (static_cast<std::size_t>(count) > cells.size()) {
    throw InvalidScript("scene too small for " + std::to_string(count) + " random actors");
  }
  for (int i = 0; i < count; ++i) {
    Actor a;
    a.archetype = kAllArchetypes[static_cast<std::size_t>(i) % kAllArchetypes.size()];
    const int cell = cells[static_cast<std::size_t>(i)];
    const auto [w, h] = body_size(a);
    a.x = (cell % cols) * kCell + static_cast<int>(rng::uniform_int(e, 0, kCell - std::max(w, h)));
    a.y = (cell / cols) * kCell + static_cast<int>(rng::uniform_int(e, 0, kCell - std::max(w, h)));
    if (a.archetype == Archetype::Runner) {
      a.speed = 3.0 + static_cast<double>(rng::uniform_int(e, 0, 2));
    } else if (a.archetype == Archetype::Walker) {
      a.speed = 1.5 + 0.5 * static_cast<double>(rng::uniform_int(e, 0, 2));
    }
    if (is_mover(a.archetype)) a.heading_deg = 45.0 * static_cast<double>(rng::uniform_int(e, 0, 7));
    script.actors.push_back(a);
  }
}

VideoMeta scene_meta(const Script& s) {
  VideoMeta m;
  m.video_id = s.video_id;
  m.pattern = s.pattern;
  m.altitude_m = s.altitude_m;
  m.path_kind = PathKind::Straight;
  m.width = s.width;
  m.height = s.height;
  m.fps = s.fps;
  m.frame_count = s.frame_count;
  m.synthetic = true;
  return m;
}

Scene::Scene(Script script) : script_(std::move(script)), meta_(scene_meta(script_)) {
  validate(script_);
  triage::validate(meta_);
  rng::Engine e(rng::combine(script_.seed, 0xC0104));
  for (std::size_t i = 0; i < script_.actors.size(); ++i) {
    // Channels in [80, 230] never collide with the background or the stripes.
    colors_.push_back({static_cast<std::uint8_t>(rng::uniform_int(e, 80, 230)),
                       static_cast<std::uint8_t>(rng::uniform_int(e, 80, 230)),
                       static_cast<std::uint8_t>(rng::uniform_int(e, 80, 230))});
  }
  for (std::size_t i = 0; i < script_.actors.size(); ++i) {
    Track t;
    t.track_id = i + 1;
    t.video_id = script_.video_id;
    const DamageStatus status = ground_truth(script_.actors[i].archetype);
    for (std::int64_t f = 0; f < script_.frame_count; ++f) {
      BBox box;
      if (actor_box(i, f, box)) t.annotations.push_back({f, t.track_id, box, status});
    }
    tracks_.push_back(std::move(t));
  }
}

bool Scene::actor_box(std::size_t actor, std::int64_t frame, BBox& out) const {
  return box_at(script_.actors[actor], script_, frame, out);
}

int Scene::wave_offset(std::int64_t frames_since_spawn) {
  const double phase = 2.0 * std::numbers::pi * static_cast<double>(frames_since_spawn % kWavePeriod) /
                       kWavePeriod;
  return round_half_up(kWaveAmplitude * std::sin(phase));
}

Image Scene::render(std::int64_t index) const {
  if (index < 0 || index >= meta_.frame_count) {
    throw MissingFrame("frame " + std::to_string(index) + " outside " + meta_.video_id);
  }
  Image img(meta_.width, meta_.height);
  fill_rect(img, 0, 0, img.width, img.height, kBackground.r, kBackground.g, kBackground.b);
  for (std::size_t i = 0; i < script_.actors.size(); ++i) {
    BBox box;
    if (!actor_box(i, index, box)) continue;
    const Palette c = colors_[i];
    fill_rect(img, box.x, box.y, box.w, box.h, c.r, c.g, c.b);
    if (script_.actors[i].archetype != Archetype::Waver) continue;
    // Striped arm in the upper half of the body, shifted by the wave phase.
    const int offset = wave_offset(index - script_.actors[i].spawn_frame);
    for (int yy = box.y; yy < box.y + box.h / 2; ++yy) {
      for (int col = 0; col < box.w; ++col) {
        const bool light = ((col - offset) % 2 + 2) % 2 == 0;
        const Palette s = light ? kStripeLight : kStripeDark;
        std::uint8_t* p = img.at(box.x + col, yy);
        p[0] = s.r;
        p[1] = s.g;
        p[2] = s.b;
      }
    }
  }
  return img;
}

GeneratedScene generate_synthetic_scene(const Script& script) {
  auto scene = std::make_shared<const Scene>(script);
  return GeneratedScene{scene, FrameSource(scene), scene->tracks(), scene->meta()};
}

Script parse_script(std::istream& in, std::optional<std::uint64_t> seed) {
  Script s;
  std::string line;
  std::size_t line_no = 0;
  int random_actors = 0;
  while (csv::next_line(in, line, line_no)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    const std::string at = "line " + std::to_string(line_no) + ": ";
    auto need = [&](auto& value) {
      if (!(ls >> value)) throw ParseError(at + "missing value for '" + key + "'");
    };
    if (key == "seed") {
      need(s.seed);
    } else if (key == "video_id") {
      need(s.video_id);
    } else if (key == "pattern") {
      char p = 0;
      need(p);
      if (p < 'A' || p > 'E') throw ParseError(at + "pattern must be A..E");
      s.pattern = static_cast<Pattern>(p);
    } else if (key == "altitude") {
      need(s.altitude_m);
    } else if (key == "size") {
      need(s.width);
      need(s.height);
    } else if (key == "fps") {
      need(s.fps);
    } else if (key == "frames") {
      need(s.frame_count);
    } else if (key == "random_actors") {
      need(random_actors);
    } else if (key == "actor") {
      std::string kind;
      need(kind);
      Actor a;
      a.archetype = archetype_from_string(kind);
      std::map<std::string, double> kv;
      std::string tok;
      while (ls >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) throw ParseError(at + "expected key=value, got '" + tok + "'");
        kv[tok.substr(0, eq)] = csv::to_double(tok.substr(eq + 1), line_no, tok.substr(0, eq));
      }
      if (!kv.contains("x") || !kv.contains("y")) throw ParseError(at + "actor needs x= and y=");
      for (const auto& [k, v] : kv) {
        if (k == "x") a.x = static_cast<int>(v);
        else if (k == "y") a.y = static_cast<int>(v);
        else if (k == "spawn") a.spawn_frame = static_cast<std::int64_t>(v);
        else if (k == "until") a.until_frame = static_cast<std::int64_t>(v);
        else if (k == "heading") a.heading_deg = v;
        else if (k == "speed") a.speed = v;
        else if (k == "w") a.body_w = static_cast<int>(v);
        else if (k == "h") a.body_h = static_cast<int>(v);
        else throw ParseError(at + "unknown actor key '" + k + "'");
      }
      s.actors.push_back(a);
    } else {
      throw ParseError(at + "unknown directive '" + key + "'");
    }
  }
  if (seed) s.seed = *seed;
  if (random_actors > 0) add_random_actors(s, random_actors);
  validate(s);
  return s;
}

Script parse_script(const std::filesystem::path& path, std::optional<std::uint64_t> seed) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open script " + path.string());
  return parse_script(in, seed);
}

void write_script(std::ostream& out, const Script& s) {
  out << "seed " << s.seed << "\nvideo_id " << s.video_id << "\npattern "
      << static_cast<char>(s.pattern) << "\naltitude " << s.altitude_m << "\nsize " << s.width
      << ' ' << s.height << "\nfps " << s.fps << "\nframes " << s.frame_count << '\n';
  for (const auto& a : s.actors) {
    out << "actor " << to_string(a.archetype) << " x=" << a.x << " y=" << a.y
        << " spawn=" << a.spawn_frame << " until=" << a.until_frame << " heading=" << a.heading_deg
        << " speed=" << a.speed << " w=" << a.body_w << " h=" << a.body_h << '\n';
  }
}

}  // namespace triage::synth
