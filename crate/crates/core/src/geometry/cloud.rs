use serde::{Deserialize, Serialize};

use super::{Pose, Vec3};
use crate::error::{Error, Result};

/// Which sensor produced a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceTag {
    Camera,
    Lidar,
    Synthetic,
}

/// Ordered set of 3D points in meters with optional per-point source tags.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    points: Vec<Vec3>,
    sources: Option<Vec<SourceTag>>,
}

impl PointCloud {
    /// Fails on the first non-finite coordinate.
    pub fn new(points: Vec<Vec3>) -> Result<Self> {
        if let Some(i) = points.iter().position(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::NonFinitePoint(i));
        }
        Ok(Self {
            points,
            sources: None,
        })
    }

    pub fn with_sources(points: Vec<Vec3>, sources: Vec<SourceTag>) -> Result<Self> {
        if sources.len() != points.len() {
            return Err(Error::OutOfRange(format!(
                "{} source tags for {} points",
                sources.len(),
                points.len()
            )));
        }
        let mut cloud = Self::new(points)?;
        cloud.sources = Some(sources);
        Ok(cloud)
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn sources(&self) -> Option<&[SourceTag]> {
        self.sources.as_deref()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn centroid(&self) -> Option<Vec3> {
        if self.points.is_empty() {
            return None;
        }
        let sum = self.points.iter().fold(Vec3::zeros(), |acc, p| acc + p);
        Some(sum / self.points.len() as f64)
    }

    /// Concatenates two clouds. Source tags survive only if both sides carry them.
    pub fn merged(&self, other: &PointCloud) -> PointCloud {
        let mut points = self.points.clone();
        points.extend_from_slice(&other.points);
        let sources = match (&self.sources, &other.sources) {
            (Some(a), Some(b)) => Some(a.iter().chain(b).copied().collect()),
            _ => None,
        };
        PointCloud { points, sources }
    }

    pub fn into_points(self) -> Vec<Vec3> {
        self.points
    }
}

/// Applies `pose` to every point of `cloud`.
pub fn transform_cloud(pose: &Pose, cloud: &PointCloud) -> Result<PointCloud> {
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    Ok(PointCloud {
        points: cloud.points.iter().map(|p| pose.transform_point(p)).collect(),
        sources: cloud.sources.clone(),
    })
}
