//! Software-city geometry: packages become stacked districts, classes become
//! buildings, runtime edges become pipes between building roofs.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::compare::{ComparedEntity, ComparisonModel, EntityKind};
use crate::trace::EdgeKey;

pub const DISTRICT_PADDING: f64 = 0.5;
pub const CHILD_GAP: f64 = 0.5;
pub const SLAB_THICKNESS: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x: f64,
    pub z: f64,
    pub width: f64,
    pub depth: f64,
}

impl Rect {
    pub fn area(&self) -> f64 {
        self.width * self.depth
    }

    /// True when the open interiors intersect.
    pub fn overlaps(&self, o: &Rect) -> bool {
        self.x < o.x + o.width && o.x < self.x + self.width && self.z < o.z + o.depth && o.z < self.z + self.depth
    }

    pub fn contains(&self, o: &Rect) -> bool {
        o.x >= self.x && o.z >= self.z && o.x + o.width <= self.x + self.width && o.z + o.depth <= self.z + self.depth
    }

    pub fn inset(&self, by: f64) -> Rect {
        Rect { x: self.x + by, z: self.z + by, width: self.width - 2.0 * by, depth: self.depth - 2.0 * by }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LayoutItem {
    pub fqn: String,
    pub entity_kind: EntityKind,
    pub rect: Rect,
    pub base_y: f64,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EdgeAnchor {
    pub edge_key: EdgeKey,
    pub from: [f64; 3],
    pub to: [f64; 3],
    pub weight: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CityLayout {
    pub items: Vec<LayoutItem>,
    pub edge_anchors: Vec<EdgeAnchor>,
}

impl CityLayout {
    pub fn item(&self, fqn: &str) -> Option<&LayoutItem> {
        self.items.iter().find(|i| i.fqn == fqn)
    }
}

/// Building footprint side and height for a class entity.
pub fn building_dimensions(class: &ComparedEntity) -> (f64, f64) {
    let methods = [class.base_metrics, class.target_metrics].iter().flatten().map(|m| m.method_count).max().unwrap_or(0);
    let side = 1.0 + 0.5 * (methods as f64).sqrt().ceil();
    let instances = match (class.base_instances, class.target_instances) {
        (None, None) => methods as u64,
        (b, t) => b.unwrap_or(0).max(t.unwrap_or(0)),
    };
    (side, 0.5 + (1.0 + instances as f64).log2())
}

/// Placement of one child inside its district, relative to the district's
/// own origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    /// Position of the child in the input slice.
    pub index: usize,
    pub fqn: String,
    pub x: f64,
    pub z: f64,
    pub width: f64,
    pub depth: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct District {
    pub width: f64,
    pub depth: f64,
    pub placements: Vec<Placement>,
}

/// Greedy shelf packing. Children are ordered by area descending then fqn,
/// rows are filled left to right up to a strip width of
/// `ceil(sqrt(sum((w + gap) * (d + gap))))`.
pub fn layout_district(children: &[(String, f64, f64)]) -> District {
    let mut order: Vec<(usize, &(String, f64, f64))> = children.iter().enumerate().collect();
    order.sort_by(|(_, a), (_, b)| (b.1 * b.2).total_cmp(&(a.1 * a.2)).then_with(|| a.0.cmp(&b.0)));
    let strip = order.iter().map(|(_, (_, w, d))| (w + CHILD_GAP) * (d + CHILD_GAP)).sum::<f64>().sqrt().ceil();

    let mut placements = Vec::with_capacity(order.len());
    let (mut x, mut z, mut shelf) = (0.0_f64, 0.0_f64, 0.0_f64);
    let (mut width, mut depth) = (0.0_f64, 0.0_f64);
    for (index, (fqn, w, d)) in order {
        if x > 0.0 && x + w > strip {
            z += shelf + CHILD_GAP;
            x = 0.0;
            shelf = 0.0;
        }
        placements.push(Placement { index, fqn: fqn.clone(), x: x + DISTRICT_PADDING, z: z + DISTRICT_PADDING, width: *w, depth: *d });
        width = width.max(x + w);
        depth = depth.max(z + d);
        shelf = shelf.max(*d);
        x += w + CHILD_GAP;
    }
    District { width: width + 2.0 * DISTRICT_PADDING, depth: depth + 2.0 * DISTRICT_PADDING, placements }
}

enum Shape<'a> {
    District { entity: &'a ComparedEntity, inner: District, children: Vec<Shape<'a>> },
    Building { entity: &'a ComparedEntity, side: f64, height: f64 },
}

impl Shape<'_> {
    fn fqn(&self) -> &str {
        match self {
            Shape::District { entity, .. } | Shape::Building { entity, .. } => &entity.fqn,
        }
    }

    fn size(&self) -> (f64, f64) {
        match self {
            Shape::District { inner, .. } => (inner.width, inner.depth),
            Shape::Building { side, .. } => (*side, *side),
        }
    }
}

/// Classes nested in other classes are laid out beside their outer class.
fn collect_classes<'a>(e: &'a ComparedEntity, out: &mut Vec<Shape<'a>>) {
    let (side, height) = building_dimensions(e);
    out.push(Shape::Building { entity: e, side, height });
    for c in &e.children {
        if c.entity_kind == EntityKind::Class {
            collect_classes(c, out);
        }
    }
}

fn shapes<'a>(entities: &'a [ComparedEntity]) -> Vec<Shape<'a>> {
    let mut out = Vec::new();
    for e in entities {
        match e.entity_kind {
            EntityKind::Package => {
                let children = shapes(&e.children);
                let sizes: Vec<_> = children.iter().map(|c| (c.fqn().to_string(), c.size().0, c.size().1)).collect();
                out.push(Shape::District { entity: e, inner: layout_district(&sizes), children });
            }
            EntityKind::Class => collect_classes(e, &mut out),
            EntityKind::Method => {}
        }
    }
    out
}

fn place(shapes: &[Shape<'_>], district: &District, ox: f64, oz: f64, base_y: f64, items: &mut Vec<LayoutItem>) {
    for p in &district.placements {
        let shape = &shapes[p.index];
        let rect = Rect { x: ox + p.x, z: oz + p.z, width: p.width, depth: p.depth };
        match shape {
            Shape::District { entity, inner, children } => {
                items.push(LayoutItem {
                    fqn: entity.fqn.clone(),
                    entity_kind: EntityKind::Package,
                    rect,
                    base_y,
                    height: SLAB_THICKNESS,
                });
                place(children, inner, rect.x, rect.z, base_y + SLAB_THICKNESS, items);
            }
            Shape::Building { entity, height, .. } => items.push(LayoutItem {
                fqn: entity.fqn.clone(),
                entity_kind: EntityKind::Class,
                rect,
                base_y,
                height: *height,
            }),
        }
    }
}

/// Geometry for a (filtered) comparison model plus warnings for edges that
/// had to be dropped.
pub fn layout_city(m: &ComparisonModel) -> (CityLayout, Vec<String>) {
    let roots = shapes(&m.entities);
    let sizes: Vec<_> = roots.iter().map(|c| (c.fqn().to_string(), c.size().0, c.size().1)).collect();
    let ground = layout_district(&sizes);
    let mut items = Vec::new();
    place(&roots, &ground, -DISTRICT_PADDING, -DISTRICT_PADDING, 0.0, &mut items);

    let roofs: HashMap<&str, [f64; 3]> = items
        .iter()
        .filter(|i| i.entity_kind == EntityKind::Class)
        .map(|i| (i.fqn.as_str(), [i.rect.x + i.rect.width / 2.0, i.base_y + i.height, i.rect.z + i.rect.depth / 2.0]))
        .collect();
    let roof = |fqn: &str| roofs.get(fqn).copied();
    let mut warnings = Vec::new();
    let mut edge_anchors = Vec::new();
    for e in &m.edges {
        match (roof(&e.key.caller_class), roof(&e.key.callee_class)) {
            (Some(from), Some(to)) => edge_anchors.push(EdgeAnchor {
                edge_key: e.key.clone(),
                from,
                to,
                weight: (1.0 + (e.base_count.unwrap_or(0) + e.target_count.unwrap_or(0)) as f64).log2(),
            }),
            _ => warnings.push(format!("edge {} dropped: endpoint class not in model", e.key)),
        }
    }
    (CityLayout { items, edge_anchors }, warnings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compare::{ChangeStatus, EntityMetrics, Origin};
    use crate::model::LocMetrics;

    fn class(fqn: &str, methods: Option<u32>, instances: (Option<u64>, Option<u64>)) -> ComparedEntity {
        let metrics = methods.map(|method_count| EntityMetrics { loc: LocMetrics::default(), method_count });
        ComparedEntity {
            fqn: fqn.into(),
            entity_kind: EntityKind::Class,
            status: ChangeStatus::Unchanged,
            origin: Origin::Static,
            base_metrics: metrics,
            target_metrics: metrics,
            base_instances: instances.0,
            target_instances: instances.1,
            base_calls: None,
            target_calls: None,
            children: vec![],
        }
    }

    #[test]
    fn dimensions() {
        assert_eq!(building_dimensions(&class("A", Some(0), (None, None))), (1.0, 0.5));
        assert_eq!(building_dimensions(&class("A", Some(9), (Some(7), None))), (2.5, 3.5));
        assert_eq!(building_dimensions(&class("A", Some(9), (Some(0), Some(0)))).1, 0.5);
        assert_eq!(building_dimensions(&class("A", None, (Some(3), Some(1)))), (1.0, 2.5));
        // no runtime: method count stands in for instances
        assert_eq!(building_dimensions(&class("A", Some(3), (None, None))).1, 2.5);
    }

    #[test]
    fn single_child_district() {
        let d = layout_district(&[("a".into(), 2.0, 2.0)]);
        assert_eq!((d.width, d.depth), (3.0, 3.0));
        assert_eq!((d.placements[0].x, d.placements[0].z), (0.5, 0.5));
    }

    #[test]
    fn two_unit_squares_share_a_shelf() {
        let d = layout_district(&[("b".into(), 1.0, 1.0), ("a".into(), 1.0, 1.0)]);
        assert_eq!(d.placements[0].fqn, "a");
        assert_eq!(d.placements[0].z, d.placements[1].z);
        assert!(d.width >= 2.0 + 2.0 * DISTRICT_PADDING);
    }

    #[test]
    fn empty_model() {
        let c = crate::model::CommitRef::new("a", "b", "c".repeat(40), None).unwrap();
        let m = ComparisonModel { base: c.clone(), target: c, base_window: None, target_window: None, entities: vec![], edges: vec![] };
        let (l, w) = layout_city(&m);
        assert!(l.items.is_empty() && l.edge_anchors.is_empty() && w.is_empty());
    }
}
