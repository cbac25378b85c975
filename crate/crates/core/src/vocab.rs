//! Class and property names shared by the detection built-ins, the rule
//! pack and the exporters.

pub const DOMAIN_CONCEPT: &str = "DomainConcept";
pub const GEOMETRY: &str = "Geometry";
pub const SCENE: &str = "Scene";
pub const ALGORITHM: &str = "Algorithm";
pub const CHARACTERISTICS: &str = "Characteristics";

pub const VERTICAL_BB: &str = "Vertical_BoundingBox";
pub const HORIZONTAL_BB: &str = "Horizontal_BoundingBox";

pub const HAS_GEOMETRY: &str = "hasGeometry";
pub const HAS_TOPOLOGIC_RELATION: &str = "hasTopologicRelation";
pub const IS_DESIGNED_FOR: &str = "IsDeseignedFor";
pub const HAS_CHARACTERISTICS: &str = "hasCharacteristics";
pub const HAS_POINT_CLOUD: &str = "hasPointCloud";

pub const HEIGHT: &str = "height";
pub const LENGTH: &str = "length";
pub const WIDTH: &str = "width";
pub const CX: &str = "cx";
pub const CY: &str = "cy";
pub const CZ: &str = "cz";

/// Box corners on a geometry record.
pub const BOX_COORDS: [&str; 6] = ["xmin", "ymin", "zmin", "xmax", "ymax", "zmax"];
/// Line anchor and direction on a geometry record.
pub const LINE_COORDS: [&str; 6] = ["ax", "ay", "az", "dirx", "diry", "dirz"];

pub const GEOMETRY_SUFFIX: &str = "_geom";
