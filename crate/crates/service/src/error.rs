use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use geoden_core::query::{ErrorKind, QueryError};
use serde::Serialize;

/// Every error leaves the service as `{code, field, message}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorBody {
    pub code: String,
    pub field: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    pub fn new(
        status: StatusCode,
        code: &str,
        field: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        Self {
            status,
            body: ErrorBody {
                code: code.to_string(),
                field: field.into(),
                message: message.into(),
            },
        }
    }

    pub fn not_ready() -> Self {
        Self::new(
            StatusCode::SERVICE_UNAVAILABLE,
            "not_ready",
            "",
            "no snapshot is loaded",
        )
    }
}

impl From<QueryError> for ApiError {
    fn from(e: QueryError) -> Self {
        let status = match e.kind {
            ErrorKind::BadRequest => StatusCode::BAD_REQUEST,
            ErrorKind::UnknownCountry | ErrorKind::UnknownRegion => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
        };
        Self {
            status,
            body: ErrorBody {
                code: e.code,
                field: e.field,
                message: e.message,
            },
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}
