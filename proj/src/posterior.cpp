#include "atsearch/posterior.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "atsearch/errors.hpp"

namespace atsearch {

double Posterior::Node::total() const {
    return std::accumulate(mass.begin(), mass.end(), 0.0);
}

Posterior::Posterior(const Posterior& other)
    : lattice_(other.lattice_),
      scales_(other.scales_),
      tau_(other.tau_),
      absent_(other.absent_),
      root_(other.root_ ? clone(*other.root_) : nullptr),
      blocked_(other.blocked_),
      dead_(other.dead_) {}

Posterior& Posterior::operator=(const Posterior& other) {
    if (this != &other) {
        Posterior tmp(other);
        *this = std::move(tmp);
    }
    return *this;
}

std::unique_ptr<Posterior::Node> Posterior::clone(const Node& node) {
    auto out = std::make_unique<Node>();
    out->id = node.id;
    out->rect = node.rect;
    out->mass = node.mass;
    for (int c = 0; c < 4; ++c) {
        if (node.child[c]) out->child[c] = clone(*node.child[c]);
    }
    return out;
}

Posterior Posterior::init(const Lattice& lattice, double prior_absent, int scales,
                          double tau) {
    return init_blocked(lattice, prior_absent, scales, tau, {});
}

Posterior Posterior::init_blocked(const Lattice& lattice, double prior_absent,
                                  int scales, double tau, std::vector<Rect> blocked) {
    if (prior_absent < 0.0 || prior_absent >= 1.0) {
        throw std::invalid_argument("prior_absent must lie in [0, 1)");
    }
    if (scales < 1) throw std::invalid_argument("scale count must be >= 1");
    if (tau < 0.0 || tau >= 1.0) throw std::invalid_argument("tau must lie in [0, 1)");

    Posterior p;
    p.lattice_ = lattice;
    p.scales_ = scales;
    p.tau_ = tau;
    p.blocked_ = std::move(blocked);
    p.dead_.resize(std::size_t(scales));
    p.root_ = std::make_unique<Node>();
    p.root_->id = CellId{1, 1};
    p.root_->rect = lattice.image_rect();
    p.root_->mass.assign(std::size_t(scales), 0.0);

    std::vector<std::int64_t> live(static_cast<std::size_t>(scales), 0);
    std::int64_t live_total = 0;
    for (int s = 1; s <= scales; ++s) {
        live[std::size_t(s - 1)] = p.live_pixels(p.root_->rect, s);
        live_total += live[std::size_t(s - 1)];
    }
    if (live_total == 0) {
        p.absent_ = 1.0;
        return p;
    }
    p.absent_ = prior_absent;
    const double present = 1.0 - prior_absent;
    for (int s = 1; s <= scales; ++s) {
        p.root_->mass[std::size_t(s - 1)] =
            present * double(live[std::size_t(s - 1)]) / double(live_total);
    }
    return p;
}

std::int64_t Posterior::blocked_area_in(const Rect& rect) const {
    if (blocked_.empty()) return 0;
    return rect_union_area(rect, blocked_);
}

std::int64_t Posterior::live_pixels(const Rect& rect, int scale) const {
    std::int64_t live = rect.area() - blocked_area_in(rect);
    const auto& dead = dead_[std::size_t(scale - 1)];
    if (!dead.empty()) {
        if (std::int64_t(dead.size()) < rect.area()) {
            for (const std::int64_t key : dead) {
                const int px = int(key % lattice_.width());
                const int py = int(key / lattice_.width());
                if (rect.contains(px, py)) --live;
            }
        } else {
            for (int py = rect.y; py < rect.y + rect.h; ++py) {
                for (int px = rect.x; px < rect.x + rect.w; ++px) {
                    if (dead.contains(std::int64_t(py) * lattice_.width() + px)) --live;
                }
            }
        }
    }
    return live;
}

std::int64_t Posterior::live_pose_count() const {
    std::int64_t total = 0;
    for (int s = 1; s <= scales_; ++s) {
        total += live_pixels(lattice_.image_rect(), s);
    }
    return total;
}

bool Posterior::is_dead(int px, int py, int scale) const {
    for (const Rect& b : blocked_) {
        if (b.contains(px, py)) return true;
    }
    return dead_[std::size_t(scale - 1)].contains(std::int64_t(py) * lattice_.width() +
                                                  px);
}

void Posterior::split_node(Node& node) {
    const auto quads = Lattice::split(node.rect);
    std::vector<std::int64_t> parent_live(static_cast<std::size_t>(scales_), 0);
    for (int s = 1; s <= scales_; ++s) {
        parent_live[std::size_t(s - 1)] = live_pixels(node.rect, s);
    }
    for (int c = 0; c < 4; ++c) {
        if (quads[c].empty()) continue;
        auto child = std::make_unique<Node>();
        child->id = Lattice::child(node.id, c);
        child->rect = quads[c];
        child->mass.assign(std::size_t(scales_), 0.0);
        for (int s = 1; s <= scales_; ++s) {
            const std::int64_t lp = parent_live[std::size_t(s - 1)];
            if (lp == 0) continue;
            const std::int64_t lc = live_pixels(quads[c], s);
            child->mass[std::size_t(s - 1)] =
                node.mass[std::size_t(s - 1)] * (double(lc) / double(lp));
        }
        node.child[c] = std::move(child);
    }
}

Posterior::Node* Posterior::ensure_instantiated(CellId target) {
    if (target.level < 1 || target.level > lattice_.depth() || target.index < 1 ||
        target.index > lattice_.cells_at_level(target.level)) {
        throw std::invalid_argument("cell id outside the lattice");
    }
    if (lattice_.cell_rect(target).empty()) {
        throw std::invalid_argument("degenerate cell cannot be instantiated");
    }
    Node* node = root_.get();
    for (int lvl = target.level; lvl > 1; --lvl) {
        const int shift = 2 * (lvl - 2);
        const int slot = int(((target.index - 1) >> shift) & 3);
        if (node->leaf()) split_node(*node);
        node = node->child[slot].get();
        if (node == nullptr) {
            throw std::invalid_argument("degenerate cell cannot be instantiated");
        }
    }
    return node;
}

void Posterior::scale_subtree(Node& node, std::span<const double> ratios) {
    for (int s = 0; s < scales_; ++s) {
        node.mass[std::size_t(s)] *= ratios[std::size_t(s)];
    }
    for (auto& c : node.child) {
        if (c) scale_subtree(*c, ratios);
    }
}

void Posterior::divide_all(Node& node, double z) {
    for (double& m : node.mass) m /= z;
    for (auto& c : node.child) {
        if (c) divide_all(*c, z);
    }
}

void Posterior::resum_path(CellId target) {
    // Recompute every ancestor of target, deepest first.
    std::vector<CellId> path;
    for (CellId id = target; id.level > 1; id = Lattice::parent(id)) {
        path.push_back(Lattice::parent(id));
    }
    for (const CellId& anc : path) {
        Node* node = root_.get();
        for (int lvl = anc.level; lvl > 1; --lvl) {
            const int shift = 2 * (lvl - 2);
            node = node->child[((anc.index - 1) >> shift) & 3].get();
        }
        for (int s = 0; s < scales_; ++s) {
            double sum = 0.0;
            for (const auto& c : node->child) {
                if (c) sum += c->mass[std::size_t(s)];
            }
            node->mass[std::size_t(s)] = sum;
        }
    }
}

double Posterior::apply_update(CellId target, std::span<const double> ratios) {
    if (int(ratios.size()) != scales_) {
        throw std::invalid_argument("one likelihood ratio per scale required");
    }
    for (const double r : ratios) {
        if (!(r >= 0.0)) throw std::invalid_argument("likelihood ratios must be >= 0");
    }
    Node* target_node = ensure_instantiated(target);

    // Z per the update equation: complement mass plus ratio-weighted target mass.
    double z = absent_;
    {
        const double inside = target_node->total();
        const double outside_poses = std::max(0.0, root_->total() - inside);
        z += outside_poses;
        for (int s = 0; s < scales_; ++s) {
            z += ratios[std::size_t(s)] * target_node->mass[std::size_t(s)];
        }
    }
    if (z <= 0.0) {
        throw DegeneratePosteriorError("posterior update has normalizer Z = 0");
    }

    scale_subtree(*target_node, ratios);
    resum_path(target);

    // Normalize by the realized total; equals Z up to rounding but keeps the
    // invariant total == 1 exact over long update sequences.
    const double total = absent_ + root_->total();
    if (total <= 0.0) {
        throw DegeneratePosteriorError("posterior update has normalizer Z = 0");
    }
    absent_ /= total;
    divide_all(*root_, total);

    maintain();
    return z;
}

void Posterior::mark_dead(CellId leaf, int scale) {
    if (scale < 1 || scale > scales_) throw std::invalid_argument("scale out of range");
    if (leaf.level != lattice_.depth()) {
        throw std::invalid_argument("only leaf-level cells can be marked dead");
    }
    const Rect r = lattice_.cell_rect(leaf);
    if (r.empty()) return;
    for (const Rect& b : blocked_) {
        if (b.contains(r.x, r.y)) return;  // already excluded
    }
    dead_[std::size_t(scale - 1)].insert(std::int64_t(r.y) * lattice_.width() + r.x);
}

std::vector<double> Posterior::implicit_child_totals(const Node& node) const {
    const auto quads = Lattice::split(node.rect);
    std::vector<double> totals(4, 0.0);
    std::vector<std::int64_t> parent_live(static_cast<std::size_t>(scales_), 0);
    for (int s = 1; s <= scales_; ++s) {
        parent_live[std::size_t(s - 1)] = live_pixels(node.rect, s);
    }
    for (int c = 0; c < 4; ++c) {
        if (quads[c].empty()) continue;
        for (int s = 1; s <= scales_; ++s) {
            const std::int64_t lp = parent_live[std::size_t(s - 1)];
            if (lp == 0) continue;
            totals[std::size_t(c)] += node.mass[std::size_t(s - 1)] *
                                      (double(live_pixels(quads[c], s)) / double(lp));
        }
    }
    return totals;
}

void Posterior::prune(Node& node) {
    if (node.leaf()) return;
    for (auto& c : node.child) {
        if (c) prune(*c);
    }
    bool collapsible = true;
    for (const auto& c : node.child) {
        if (c && (!c->leaf() || c->total() > tau_)) {
            collapsible = false;
            break;
        }
    }
    if (!collapsible) return;
    // Do not collapse if the merged cell would immediately refine again: the
    // re-uniformized implicit children must also sit at or below tau.
    for (const double t : implicit_child_totals(node)) {
        if (t > tau_) return;
    }
    for (auto& c : node.child) c.reset();
}

void Posterior::refine(Node& node) {
    if (node.id.level >= lattice_.depth()) return;
    if (node.leaf()) {
        if (node.total() <= 0.0) return;
        bool wants_split = false;
        for (const double t : implicit_child_totals(node)) {
            if (t > tau_) {
                wants_split = true;
                break;
            }
        }
        if (!wants_split) return;
        split_node(node);
    }
    for (auto& c : node.child) {
        if (c) refine(*c);
    }
}

void Posterior::maintain() {
    prune(*root_);
    refine(*root_);
}

double Posterior::present_mass() const { return root_ ? root_->total() : 0.0; }

double Posterior::total_mass() const { return absent_ + present_mass(); }

std::size_t Posterior::node_count() const {
    std::size_t n = 0;
    visit([&n](const CellView&) { ++n; });
    return n;
}

void Posterior::visit(const std::function<void(const CellView&)>& fn) const {
    if (!root_) return;
    // Preorder, children in slot order: (level, index) ascending within a path.
    std::vector<const Node*> stack{root_.get()};
    while (!stack.empty()) {
        const Node* node = stack.back();
        stack.pop_back();
        CellView view;
        view.id = node->id;
        view.rect = node->rect;
        view.mass = node->mass;
        view.total = node->total();
        view.subtree_leaf = node->leaf();
        view.frontier = view.subtree_leaf && view.total > tau_;
        fn(view);
        for (int c = 3; c >= 0; --c) {
            if (node->child[c]) stack.push_back(node->child[c].get());
        }
    }
}

Posterior::MapEstimate Posterior::map_estimate() const {
    MapEstimate best;
    best.pose = Pose::make_absent();
    best.prob = -1.0;
    CellId best_id{0, 0};
    int best_scale = 0;
    visit([&](const CellView& view) {
        if (!view.subtree_leaf) return;
        for (int s = 1; s <= scales_; ++s) {
            const double m = view.mass[std::size_t(s - 1)];
            const bool better =
                m > best.prob ||
                (m == best.prob && std::tuple(view.id.level, view.id.index, s) <
                                       std::tuple(best_id.level, best_id.index, best_scale));
            if (better) {
                best.prob = m;
                best_id = view.id;
                best_scale = s;
                best.pose = Pose{view.rect.center_x(), view.rect.center_y(), s, false};
            }
        }
    });
    if (absent_ > best.prob) {
        return MapEstimate{Pose::make_absent(), absent_};
    }
    return best;
}

double Posterior::pose_mass(int px, int py, int scale) const {
    if (!root_ || !root_->rect.contains(px, py)) return 0.0;
    const Node* node = root_.get();
    while (!node->leaf()) {
        const Node* next = nullptr;
        for (const auto& c : node->child) {
            if (c && c->rect.contains(px, py)) {
                next = c.get();
                break;
            }
        }
        if (next == nullptr) return 0.0;
        node = next;
    }
    if (is_dead(px, py, scale)) return 0.0;
    const std::int64_t live = live_pixels(node->rect, scale);
    if (live == 0) return 0.0;
    return node->mass[std::size_t(scale - 1)] / double(live);
}

void Posterior::dump(std::ostream& os) const {
    struct Line {
        CellId id;
        int s;
        double mass;
    };
    std::vector<Line> lines;
    visit([&](const CellView& view) {
        for (int s = 1; s <= scales_; ++s) {
            lines.push_back({view.id, s, view.mass[std::size_t(s - 1)]});
        }
    });
    std::sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) {
        return std::tuple(a.id.level, a.id.index, a.s) <
               std::tuple(b.id.level, b.id.index, b.s);
    });
    char buf[64];
    for (const Line& line : lines) {
        std::snprintf(buf, sizeof buf, "%.12g", line.mass);
        os << line.id.level << ' ' << line.id.index << ' ' << line.s << ' ' << buf
           << '\n';
    }
    std::snprintf(buf, sizeof buf, "%.12g", absent_);
    os << "absent " << buf << '\n';
}

std::string Posterior::dump_string() const {
    std::ostringstream oss;
    dump(oss);
    return oss.str();
}

}  // namespace atsearch
